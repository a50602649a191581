//! Conditional moments of the hitting time of `a` for Brownian motion
//! started at `x ∈ (0, a)`, given that `a` is hit before 0, and two
//! independent routes to check them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuinMoments {
    pub x: f64,
    pub a: f64,
    /// `E[H_a | H_a < H_0]`
    pub m1: f64,
    /// `E[H_a² | H_a < H_0]`
    pub m2: f64,
}

fn check_domain(x: f64, a: f64) -> Result<()> {
    if !(x > 0.0 && x < a && a.is_finite()) {
        return Err(Error::Domain(format!("need 0 < x < a, got x = {x}, a = {a}")));
    }
    Ok(())
}

pub fn ruin_moments_closed_form(x: f64, a: f64) -> Result<RuinMoments> {
    check_domain(x, a)?;
    let (a2, x2) = (a * a, x * x);
    Ok(RuinMoments {
        x,
        a,
        m1: (a2 - x2) / 3.0,
        m2: (7.0 * a2 * a2 - 10.0 * a2 * x2 + 3.0 * x2 * x2) / 45.0,
    })
}

/// The same two moments written in the distance to the barrier `d = a − x`
/// and the start `x`; every coefficient is nonnegative.
pub fn l_decomposition(d: f64, x: f64) -> (f64, f64) {
    let l1 = d * d / 3.0 + 2.0 * d * x / 3.0;
    let l2 = (7.0 * d.powi(4) + 28.0 * d.powi(3) * x + 32.0 * d * d * x * x + 8.0 * d * x.powi(3))
        / 45.0;
    (l1, l2)
}

/// Solve `-½ u[i-1] + u[i] - ½ u[i+1] = rhs[i]` on the interior with zero
/// boundary values (Thomas algorithm).
fn solve_walk_system(rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n {
        let (lower, upper): (f64, f64) = (-0.5, -0.5);
        let denom = 1.0 - if i > 0 { lower * c[i - 1] } else { 0.0 };
        if denom.abs() < 1e-300 {
            return Err(Error::Singular);
        }
        c[i] = upper / denom;
        d[i] = (rhs[i] - if i > 0 { lower * d[i - 1] } else { 0.0 }) / denom;
    }
    let mut u = vec![0.0; n];
    for i in (0..n).rev() {
        u[i] = d[i] - if i + 1 < n { c[i] * u[i + 1] } else { 0.0 };
    }
    Ok(u)
}

/// Exact conditional moments for the symmetric simple random walk on
/// `{0, …, a}` absorbed at both ends, via the h-transform.
///
/// With `h(y) = y/a` the probability of reaching `a` first,
/// `g(y) = E[τ; hit a]` and `k(y) = E[τ²; hit a]` solve
/// `g = P g + h` and `k = P k + 2g − h` on the interior. The first moment
/// `g/h` coincides with the Brownian value `(a² − x²)/3`; the second
/// carries lattice corrections and is the walk's own value.
pub fn ruin_moments_chain_oracle(x: u32, a: u32) -> Result<RuinMoments> {
    if !(0 < x && x < a && a <= 200) {
        return Err(Error::Domain(format!("need integers 0 < x < a ≤ 200, got x = {x}, a = {a}")));
    }
    let h: Vec<f64> = (1..a).map(|y| y as f64 / a as f64).collect();
    let g = solve_walk_system(&h)?;
    let rhs: Vec<f64> = g.iter().zip(&h).map(|(g, h)| 2.0 * g - h).collect();
    let k = solve_walk_system(&rhs)?;
    let i = x as usize - 1;
    Ok(RuinMoments {
        x: x as f64,
        a: a as f64,
        m1: g[i] / h[i],
        m2: k[i] / h[i],
    })
}

/// Largest accepted `h·a²`; beyond this the one-sided differences are
/// dominated by curvature rather than the step.
pub const LAPLACE_MAX_STEP: f64 = 1e-2;

/// Moments from finite differences of the Laplace transform
/// `φ(θ) = sinh(x√(2θ)) / sinh(a√(2θ))` at `θ ↓ 0`, using `φ(0⁺) = x/a` and
/// samples at `θ = h, 2h`: `m1 = −φ′(0)/φ(0)`, `m2 = φ″(0)/φ(0)`.
pub fn laplace_moment_check(x: f64, a: f64, h: f64) -> Result<(f64, f64)> {
    check_domain(x, a)?;
    if !(h > 0.0) || h * a * a > LAPLACE_MAX_STEP {
        return Err(Error::Domain(format!(
            "step h = {h} must satisfy 0 < h·a² ≤ {LAPLACE_MAX_STEP}"
        )));
    }
    let phi = |theta: f64| {
        let s = (2.0 * theta).sqrt();
        (x * s).sinh() / (a * s).sinh()
    };
    let (f0, f1, f2) = (x / a, phi(h), phi(2.0 * h));
    let d1 = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
    let d2 = (f0 - 2.0 * f1 + f2) / (h * h);
    Ok((-d1 / f0, d2 / f0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        let m = ruin_moments_closed_form(1.0, 2.0).unwrap();
        assert_relative_eq!(m.m1, 1.0);
        assert_relative_eq!(m.m2, 5.0 / 3.0, epsilon = 1e-15);
        let near = ruin_moments_closed_form(2.0 - 1e-9, 2.0).unwrap();
        assert!(near.m1 < 1e-8 && near.m2 < 1e-8);
        assert!(ruin_moments_closed_form(2.0, 2.0).is_err());
        assert!(ruin_moments_closed_form(0.0, 2.0).is_err());
    }

    #[test]
    fn chain_oracle_values() {
        assert_relative_eq!(ruin_moments_chain_oracle(1, 3).unwrap().m1, 8.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(ruin_moments_chain_oracle(2, 4).unwrap().m1, 4.0, epsilon = 1e-12);
        assert_relative_eq!(ruin_moments_chain_oracle(1, 2).unwrap().m1, 1.0, epsilon = 1e-12);
        // from 1 on {0,1,2}, conditioned on hitting 2 the walk takes exactly one step
        assert_relative_eq!(ruin_moments_chain_oracle(1, 2).unwrap().m2, 1.0, epsilon = 1e-12);
        assert!(ruin_moments_chain_oracle(0, 3).is_err());
        assert!(ruin_moments_chain_oracle(3, 201).is_err());
    }

    #[test]
    fn chain_second_moment_by_path_sum() {
        // brute-force E[τ²; hit a] from x = 1 on {0..3} by summing path probabilities:
        // paths 1→2→(1→2)^k→3 take 2k+2 steps with probability (1/2)^{2k+2}
        let brute: f64 = (0..200)
            .map(|k| {
                let n = 2.0 * k as f64 + 2.0;
                n * n * 0.5f64.powf(n)
            })
            .sum();
        let m = ruin_moments_chain_oracle(1, 3).unwrap();
        assert_relative_eq!(m.m2, brute / (1.0 / 3.0), max_relative = 1e-12);
    }

    #[test]
    fn laplace_examples() {
        let (m1, m2) = laplace_moment_check(1.0, 2.0, 1e-6).unwrap();
        assert!((m1 - 1.0).abs() < 1e-4);
        assert!((m2 - 5.0 / 3.0).abs() < 1e-2);
        let (m1, _) = laplace_moment_check(1.0, 3.0, 1e-6).unwrap();
        assert!((m1 - 8.0 / 3.0).abs() < 1e-3);
        assert!(laplace_moment_check(1.0, 2.0, 0.01).is_err());
        assert!(laplace_moment_check(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn laplace_converges_at_first_order() {
        let (x, a) = (1.0, 3.0);
        let exact = ruin_moments_closed_form(x, a).unwrap();
        let err = |h: f64| {
            let (m1, m2) = laplace_moment_check(x, a, h).unwrap();
            ((m1 - exact.m1).abs(), (m2 - exact.m2).abs())
        };
        let hs = [1e-3, 1e-4];
        let (e1a, e2a) = err(hs[0]);
        let (e1b, e2b) = err(hs[1]);
        let order1 = (e1a / e1b).log10();
        let order2 = (e2a / e2b).log10();
        assert!(order1 >= 1.0 - 0.05, "m1 order {order1}");
        assert!(order2 >= 1.0 - 0.05, "m2 order {order2}");
    }

    #[test]
    fn l1_lower_bound() {
        for d in [0.0, 0.5, 3.0] {
            for x in [0.0, 1.0, 7.0] {
                assert!(l_decomposition(d, x).0 >= d * d / 3.0);
            }
        }
        assert_relative_eq!(l_decomposition(2.0, 0.0).1, 7.0 * 16.0 / 45.0);
    }

    proptest! {
        #[test]
        fn decomposition_matches_closed_form(x in 1e-3f64..10.0, d in 1e-3f64..10.0) {
            let a = x + d;
            let m = ruin_moments_closed_form(x, a).unwrap();
            let (l1, l2) = l_decomposition(d, x);
            prop_assert!((l1 - m.m1).abs() <= 1e-12 * m.m1.max(1.0));
            prop_assert!((l2 - m.m2).abs() <= 1e-12 * m.m2.max(1.0));
            prop_assert!(m.m2 >= m.m1 * m.m1);
        }

        #[test]
        fn oracle_matches_closed_form(a in 2u32..=50, x in 1u32..50) {
            prop_assume!(x < a);
            let o = ruin_moments_chain_oracle(x, a).unwrap();
            let c = ruin_moments_closed_form(x as f64, a as f64).unwrap();
            prop_assert!((o.m1 - c.m1).abs() <= 1e-9);
            prop_assert!(o.m2 >= o.m1 * o.m1 - 1e-9);
        }
    }
}
