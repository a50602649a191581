//! Increasing weight functions (x^α, x^α·(ln x)^β, e^{γx}, constants) and
//! certified tail sums of their reciprocal powers.
//!
//! Values are handled in log space throughout so that exponential growth at
//! arguments in the thousands neither overflows nor underflows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Guard for `ln x` at the x = 1 singularity of the power-log family.
const LOG_GUARD: f64 = 1.0 + 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GrowthFn {
    /// `x^alpha`
    Power { alpha: f64 },
    /// `x^alpha · (ln x)^beta`
    PowerLog { alpha: f64, beta: f64 },
    /// `e^{gamma·x}`
    Exp { gamma: f64 },
    Constant { value: f64 },
}

impl GrowthFn {
    pub fn power(alpha: f64) -> Self {
        GrowthFn::Power { alpha }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        match *self {
            GrowthFn::Power { alpha } if !ok(alpha) => Err(Error::param("alpha", "must be > 0")),
            GrowthFn::PowerLog { alpha, beta } if !ok(alpha) || !ok(beta) => {
                Err(Error::param("alpha/beta", "must both be > 0"))
            }
            GrowthFn::Exp { gamma } if !ok(gamma) => Err(Error::param("gamma", "must be > 0")),
            GrowthFn::Constant { value } if !ok(value) => {
                Err(Error::param("value", "must be > 0"))
            }
            _ => Ok(()),
        }
    }

    /// `ln Ψ(x)` for `x > 0`.
    #[inline]
    pub fn ln_value(&self, x: f64) -> f64 {
        match *self {
            GrowthFn::Power { alpha } => alpha * x.ln(),
            GrowthFn::PowerLog { alpha, beta } => alpha * x.ln() + beta * x.max(LOG_GUARD).ln().ln(),
            GrowthFn::Exp { gamma } => gamma * x,
            GrowthFn::Constant { value } => value.ln(),
        }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            GrowthFn::Power { alpha } => x.powf(alpha),
            GrowthFn::Constant { value } => value,
            _ => self.ln_value(x).exp(),
        }
    }

    /// Whether `Σ Ψ(k)^{-power}` converges.
    pub fn summable(&self, power: f64) -> bool {
        match *self {
            GrowthFn::Power { alpha } => alpha * power > 1.0,
            GrowthFn::PowerLog { alpha, beta } => {
                alpha * power > 1.0 || (alpha * power == 1.0 && beta * power > 1.0)
            }
            GrowthFn::Exp { .. } => true,
            GrowthFn::Constant { .. } => false,
        }
    }

    /// Bounds `[lo, hi]` on `ln ∫_x^∞ Ψ(u)^{-power} du`, for `x ≥ 3`.
    fn ln_integral(&self, x: f64, power: f64) -> (f64, f64) {
        match *self {
            GrowthFn::Power { alpha } => {
                let q = alpha * power;
                let v = (1.0 - q) * x.ln() - (q - 1.0).ln();
                (v, v)
            }
            GrowthFn::PowerLog { alpha, beta } => {
                let (q, r, t) = (alpha * power, beta * power, x.ln());
                if q > 1.0 {
                    // ∫ = e^{(1−q)T} E[(T+U)^{−r}]/(q−1) with U ~ Exp(q−1); bound the
                    // expectation by T^{−r} above and (T + E U)^{−r} below (Jensen).
                    let head = (1.0 - q) * t - (q - 1.0).ln();
                    (head - r * (t + 1.0 / (q - 1.0)).ln(), head - r * t.ln())
                } else {
                    let v = (1.0 - r) * t.ln() - (r - 1.0).ln();
                    (v, v)
                }
            }
            GrowthFn::Exp { gamma } => {
                let g = gamma * power;
                let v = -g * x - g.ln();
                (v, v)
            }
            GrowthFn::Constant { .. } => (f64::INFINITY, f64::INFINITY),
        }
    }

    /// `Σ_{k ≥ start} Ψ(k + shift(k))^{-power}` with a certified enclosure.
    pub fn reciprocal_tail(&self, start: u64, power: f64, shift: Shift) -> Result<TailSum> {
        self.reciprocal_tail_with(start, power, shift, default_budget(start))
    }

    pub fn reciprocal_tail_with(
        &self,
        start: u64,
        power: f64,
        shift: Shift,
        max_terms: u64,
    ) -> Result<TailSum> {
        self.validate()?;
        shift.validate()?;
        if !(power > 0.0) {
            return Err(Error::param("power", "must be > 0"));
        }
        if start == 0 {
            return Err(Error::param("start", "tail sums start at k ≥ 1"));
        }
        if !self.summable(power) {
            return Err(Error::Divergent(format!("Σ 1/Ψ(k)^{power} for {self:?}")));
        }
        let term_ln = |k: f64| -power * self.ln_value(k + shift.at(k));
        let ln_scale = term_ln(start as f64);

        let min_end = start.max(3);
        let max_end = min_end.saturating_add(max_terms);
        let mut partial = 0.0;
        let mut k = start;
        loop {
            if k >= min_end && ((k - min_end) % 1024 == 0 || k >= max_end) {
                let (_, hi) = self.remainder_ln(k as f64, power, shift);
                let tail = (hi - ln_scale).exp() + (term_ln(k as f64) - ln_scale).exp();
                if tail <= 1e-17 * partial || k >= max_end {
                    break;
                }
            }
            partial += (term_ln(k as f64) - ln_scale).exp();
            k += 1;
        }
        let (lo, hi) = self.remainder_ln(k as f64, power, shift);
        let first_dropped = (term_ln(k as f64) - ln_scale).exp();
        let (int_lo, int_hi) = ((lo - ln_scale).exp(), (hi - ln_scale).exp());
        Ok(TailSum {
            ln_scale,
            estimate: partial + 0.5 * (int_lo + int_hi) + 0.5 * first_dropped,
            lower: partial + int_lo,
            upper: partial + int_hi + first_dropped,
            terms: k - start,
        })
    }

    /// Bounds on `ln ∫_x^∞ Ψ(u + θ(u))^{-power} du`, `x ≥ 3`.
    fn remainder_ln(&self, x: f64, power: f64, shift: Shift) -> (f64, f64) {
        match shift {
            Shift::Zero => self.ln_integral(x, power),
            Shift::Constant(c) => self.ln_integral(x + c, power),
            Shift::Log(_) => {
                // θ(u)/u is nonincreasing for u ≥ e, so u + θ(u) ≤ λu on [x, ∞)
                // with λ = 1 + θ(x)/x; monotone Ψ gives both sides.
                let th = shift.at(x);
                let lambda = 1.0 + th / x;
                let (_, hi) = self.ln_integral(x + th, power);
                let (lo, _) = self.ln_integral(lambda * x, power);
                (lo - lambda.ln(), hi)
            }
        }
    }
}

fn default_budget(start: u64) -> u64 {
    (16 * start).clamp(100_000, 4_000_000)
}

/// Nonnegative, nondecreasing argument shift θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "coefficient", rename_all = "snake_case")]
pub enum Shift {
    Zero,
    Constant(f64),
    /// `θ(x) = a · ln x`
    Log(f64),
}

impl Shift {
    #[inline]
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            Shift::Zero => 0.0,
            Shift::Constant(c) => c,
            Shift::Log(a) => a * x.ln(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Shift::Constant(c) | Shift::Log(c) if !(c >= 0.0 && c.is_finite()) => {
                Err(Error::param("shift", "coefficient must be ≥ 0"))
            }
            _ => Ok(()),
        }
    }
}

/// A tail sum stored as `e^{ln_scale} · estimate`, with
/// `e^{ln_scale} · [lower, upper]` a rigorous enclosure (up to rounding).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    pub ln_scale: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    /// Terms summed explicitly before the integral remainder.
    pub terms: u64,
}

impl TailSum {
    pub fn value(&self) -> f64 {
        self.ln_scale.exp() * self.estimate
    }

    pub fn interval(&self) -> (f64, f64) {
        let s = self.ln_scale.exp();
        (s * self.lower, s * self.upper)
    }

    pub fn ln_value(&self) -> f64 {
        self.ln_scale + self.estimate.ln()
    }

    pub fn ln_interval(&self) -> (f64, f64) {
        (self.ln_scale + self.lower.ln(), self.ln_scale + self.upper.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn basel_tail() {
        let t = GrowthFn::power(2.0).reciprocal_tail(2, 1.0, Shift::Zero).unwrap();
        let exact = PI * PI / 6.0 - 1.0;
        assert!((t.value() - exact).abs() < 1e-6);
        let (lo, hi) = t.interval();
        assert!(lo <= exact + 1e-15 && exact <= hi + 1e-15, "{lo} {exact} {hi}");
    }

    #[test]
    fn explicit_million_term_truncation() {
        // explicit terms k = 2..10^6 − 1, integral remainder from 10^6 on
        let t = GrowthFn::power(2.0)
            .reciprocal_tail_with(2, 1.0, Shift::Zero, 1_000_000 - 3)
            .unwrap();
        assert_eq!(t.terms, 999_998);
        assert!((t.value() - (PI * PI / 6.0 - 1.0)).abs() < 1e-6);
    }

    #[test]
    fn geometric_tail_in_log_space() {
        // Σ_{k≥n} e^{-k} = e^{-n}/(1 − e^{-1}); n large enough to underflow.
        let n = 5_000u64;
        let t = GrowthFn::Exp { gamma: 1.0 }.reciprocal_tail(n, 1.0, Shift::Zero).unwrap();
        let ln_exact = -(n as f64) - (1.0 - (-1f64).exp()).ln();
        assert_relative_eq!(t.ln_value(), ln_exact, max_relative = 1e-12);
        assert_eq!(t.value(), 0.0);
    }

    #[test]
    fn power_log_enclosure() {
        let f = GrowthFn::PowerLog { alpha: 2.0, beta: 1.0 };
        let t = f.reciprocal_tail(10, 1.0, Shift::Zero).unwrap();
        let n = 2_000_000f64;
        let brute: f64 = (10..2_000_000u64).map(|k| 1.0 / f.value(k as f64)).sum::<f64>()
            + 1.0 / (n * n.ln());
        let (lo, hi) = t.interval();
        assert!(lo <= brute && brute <= hi + 1e-9, "{lo} {brute} {hi}");
        assert_relative_eq!(t.value(), brute, max_relative = 1e-5);
    }

    #[test]
    fn shifted_tail_brackets_brute_force() {
        let f = GrowthFn::power(2.0);
        let t = f.reciprocal_tail_with(50, 1.0, Shift::Log(0.4), 5_000).unwrap();
        let brute: f64 = (50..20_000_000u64)
            .map(|k| {
                let k = k as f64;
                1.0 / f.value(k + 0.4 * k.ln())
            })
            .sum::<f64>()
            + 1.0 / 20_000_000.0;
        let (lo, hi) = t.interval();
        assert!(lo <= brute && brute <= hi, "{lo} {brute} {hi}");
        assert_relative_eq!(t.value(), brute, max_relative = 1e-5);
    }

    #[test]
    fn divergent_families() {
        assert!(matches!(
            GrowthFn::power(1.0).reciprocal_tail(1, 1.0, Shift::Zero),
            Err(Error::Divergent(_))
        ));
        assert!(GrowthFn::Constant { value: 1.0 }.reciprocal_tail(1, 1.0, Shift::Zero).is_err());
        assert!(GrowthFn::power(1.0).reciprocal_tail(1, 2.0, Shift::Zero).is_ok());
    }

    #[test]
    fn log_guard_at_one() {
        let f = GrowthFn::PowerLog { alpha: 2.0, beta: 1.0 };
        let v = f.value(1.0);
        assert!(v > 0.0 && v < 1e-11);
    }

    #[test]
    fn serde_shape() {
        let f: GrowthFn = toml::from_str("family = \"power_log\"\nalpha = 2.0\nbeta = 0.5").unwrap();
        assert_eq!(f, GrowthFn::PowerLog { alpha: 2.0, beta: 0.5 });
        assert!(toml::from_str::<GrowthFn>("family = \"power\"\nalpha = 2.0\nbeta = 1.0").is_err());
    }
}
