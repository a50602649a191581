//! Numeric checks of growth conditions on a weight family Ψ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{GrowthFn, Shift};

/// Geometric grid of `points` values from `lo` to `hi` inclusive.
fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 || lo >= hi {
        return vec![lo];
    }
    let step = (hi / lo).ln() / (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { hi } else { lo * (step * i as f64).exp() })
        .collect()
}

fn integer_grid(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    let mut g: Vec<u64> = geometric_grid(lo as f64, hi as f64, points)
        .into_iter()
        .map(|x| x.round() as u64)
        .collect();
    g.dedup();
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConditionReport {
    pub holds: bool,
    pub min_margin: f64,
    pub argmin: f64,
    pub first_violation: Option<f64>,
    pub points: usize,
}

/// Evaluates `Ψ(z + a·ln z)/Ψ(z + θ(z)) − (1 + 1/(2z))` on a geometric grid
/// over `z_range`.
pub fn check_psi_growth_condition(
    psi: &GrowthFn,
    theta: Shift,
    a: f64,
    z_range: (f64, f64),
    points: usize,
) -> Result<GrowthConditionReport> {
    psi.validate()?;
    if !(a > 0.0 && a < 0.5) {
        return Err(Error::param("a", format!("must lie in (0, 1/2), got {a}")));
    }
    let (lo, hi) = z_range;
    if !(lo > 1.0 && hi >= lo) {
        return Err(Error::param("z_range", "need 1 < z_min ≤ z_max"));
    }
    let mut min_margin = f64::INFINITY;
    let mut argmin = lo;
    let mut first_violation = None;
    let grid = geometric_grid(lo, hi, points);
    for &z in &grid {
        let d = psi.ln_value(z + a * z.ln()) - psi.ln_value(z + theta.at(z));
        let margin = d.exp_m1() - 0.5 / z;
        if margin < min_margin {
            min_margin = margin;
            argmin = z;
        }
        if margin <= 0.0 && first_violation.is_none() {
            first_violation = Some(z);
        }
    }
    Ok(GrowthConditionReport {
        holds: first_violation.is_none(),
        min_margin,
        argmin,
        first_violation,
        points: grid.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub n: u64,
    pub ratio: f64,
    pub running_inf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioProfile {
    pub points: Vec<RatioPoint>,
    /// Infimum over the grid; the finite-range liminf estimate.
    pub liminf_estimate: f64,
}

/// `Ψ(n)·Σ_{k≥n} Ψ(k)^{-2} / Σ_{k≥n} Ψ(k)^{-1}` at a single `n`.
pub fn tail_ratio(psi: &GrowthFn, n: u64) -> Result<f64> {
    // both sums are scaled by Ψ(n)^p, so the ratio is S2/S1 directly
    let s1 = psi.reciprocal_tail(n, 1.0, Shift::Zero)?;
    let s2 = psi.reciprocal_tail(n, 2.0, Shift::Zero)?;
    Ok(s2.estimate / s1.estimate)
}

/// Tail ratio on a geometric grid `n = 2 … n_max` with `per_decade` points per
/// decade. A divergent `Σ 1/Ψ` is reported as [`Error::Divergent`].
pub fn liminf_ratio_profile(psi: &GrowthFn, n_max: u64, per_decade: usize) -> Result<RatioProfile> {
    if n_max < 2 {
        return Err(Error::param("n_max", "must be ≥ 2"));
    }
    let decades = (n_max as f64 / 2.0).log10();
    let points = ((decades * per_decade as f64).ceil() as usize + 1).max(2);
    let mut inf = f64::INFINITY;
    let mut out = Vec::new();
    for n in integer_grid(2, n_max, points) {
        let ratio = tail_ratio(psi, n)?;
        inf = inf.min(ratio);
        out.push(RatioPoint {
            n,
            ratio,
            running_inf: inf,
        });
    }
    Ok(RatioProfile {
        points: out,
        liminf_estimate: inf,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationPoint {
    pub n: u64,
    /// First index of the shifted (left-hand) sum.
    pub shifted_start: u64,
    /// `ln(LHS / RHS)`
    pub log_slack: f64,
    /// Whether the certified enclosures alone prove LHS ≥ RHS.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailDominationReport {
    pub holds: bool,
    pub min_log_slack: f64,
    pub violations: Vec<u64>,
    pub points: Vec<DominationPoint>,
}

/// Compares `Σ_{k ≥ n − ½⌊ln n⌋ − 1} 1/Ψ(k + θ(k))` against `Σ_{k ≥ n} 1/Ψ(k)`
/// on a geometric grid of `n` over `n_range`.
pub fn check_tail_domination(
    psi: &GrowthFn,
    theta: Shift,
    n_range: (u64, u64),
    points: usize,
) -> Result<TailDominationReport> {
    let (lo, hi) = n_range;
    if !(lo >= 3 && hi >= lo) {
        return Err(Error::param("n_range", "need 3 ≤ n_min ≤ n_max"));
    }
    let mut out = Vec::new();
    let mut violations = Vec::new();
    let mut min_slack = f64::INFINITY;
    for n in integer_grid(lo, hi, points) {
        let start = (n as f64 - 0.5 * (n as f64).ln().floor() - 1.0).ceil().max(1.0) as u64;
        let left = psi.reciprocal_tail(start, 1.0, theta)?;
        let right = psi.reciprocal_tail(n, 1.0, Shift::Zero)?;
        let log_slack = left.ln_value() - right.ln_value();
        let certified = left.ln_interval().0 >= right.ln_interval().1;
        if log_slack < 0.0 {
            violations.push(n);
        }
        min_slack = min_slack.min(log_slack);
        out.push(DominationPoint {
            n,
            shifted_start: start,
            log_slack,
            certified,
        });
    }
    Ok(TailDominationReport {
        holds: violations.is_empty(),
        min_log_slack: min_slack,
        violations,
        points: out,
    })
}
