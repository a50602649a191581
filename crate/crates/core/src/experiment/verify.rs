//! The numeric checker battery behind `kind = "verify"`.

use serde::{Deserialize, Serialize};

use crate::analysis::psi_checks::tail_ratio;
use crate::analysis::{
    check_psi_growth_condition, check_tail_domination, l_decomposition, laplace_moment_check,
    liminf_ratio_profile, ruin_moments_chain_oracle, ruin_moments_closed_form, RatioProfile,
};
use crate::error::{Error, Result};
use crate::growth::{GrowthFn, Shift};

pub const CHECK_COLUMNS: &str = "name,passed,value,tolerance,detail";

/// Checker parameters. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Chain oracle runs over all integer `0 < x < a ≤ chain_max_barrier`.
    pub chain_max_barrier: u32,
    pub chain_tolerance: f64,
    /// `(x, a)` pairs for the Laplace-transform moment check.
    pub laplace_points: Vec<[f64; 2]>,
    pub laplace_step: f64,
    pub laplace_m1_tolerance: f64,
    pub laplace_m2_tolerance: f64,
    pub decomposition_points: usize,
    pub decomposition_tolerance: f64,
    pub psi: GrowthFn,
    pub theta: Shift,
    pub a: f64,
    pub z_range: [f64; 2],
    pub z_points: usize,
    /// `n` at which the tail ratio is compared with its limit.
    pub ratio_n: u64,
    pub ratio_tolerance: f64,
    pub profile_n_max: u64,
    pub profile_per_decade: usize,
    pub domination_range: [u64; 2],
    pub domination_points: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            chain_max_barrier: 50,
            chain_tolerance: 1e-9,
            laplace_points: vec![[1.0, 2.0], [1.0, 3.0], [2.0, 5.0]],
            laplace_step: 1e-6,
            laplace_m1_tolerance: 1e-3,
            laplace_m2_tolerance: 1e-2,
            decomposition_points: 100,
            decomposition_tolerance: 1e-12,
            psi: GrowthFn::power(2.0),
            theta: Shift::Log(0.4),
            a: 0.45,
            // the square family meets the growth condition only past z ≈ e^5
            z_range: [6f64.exp(), 1e6],
            z_points: 400,
            ratio_n: 10_000,
            ratio_tolerance: 1e-2,
            profile_n_max: 100_000,
            profile_per_decade: 8,
            domination_range: [1_000, 100_000],
            domination_points: 20,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        self.psi.validate()?;
        if !(self.a > 0.0 && self.a < 0.5) {
            return Err(Error::param("a", "must lie in (0, 1/2)"));
        }
        if !(self.z_range[0] > 1.0 && self.z_range[1] >= self.z_range[0]) {
            return Err(Error::param("z_range", "need 1 < z_min ≤ z_max"));
        }
        if !(self.domination_range[0] >= 3 && self.domination_range[1] >= self.domination_range[0]) {
            return Err(Error::param("domination_range", "need 3 ≤ n_min ≤ n_max"));
        }
        if !(2..=200).contains(&self.chain_max_barrier) {
            return Err(Error::param("chain_max_barrier", "must be in 2..=200"));
        }
        if self.laplace_points.iter().any(|p| !(p[0] > 0.0 && p[1] > p[0])) {
            return Err(Error::param("laplace_points", "each [x, a] needs 0 < x < a"));
        }
        Ok(())
    }
}

/// `lim Ψ(n)·Σ_{k≥n}Ψ(k)^{-2} / Σ_{k≥n}Ψ(k)^{-1}` where known in closed form.
pub fn tail_ratio_limit(psi: &GrowthFn) -> Option<f64> {
    match *psi {
        GrowthFn::Power { alpha } if alpha > 1.0 => Some((alpha - 1.0) / (2.0 * alpha - 1.0)),
        GrowthFn::Exp { gamma } => Some(1.0 / (1.0 + (-gamma).exp())),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed error or margin.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    pub ratio_profile: Option<RatioProfile>,
}

fn check(name: &str, value: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_owned(),
        passed: value <= tolerance,
        value,
        tolerance,
        detail,
    }
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut checks = Vec::new();

    // l_decomposition against the closed form on a deterministic grid
    let side = (cfg.decomposition_points as f64).sqrt().ceil() as usize;
    let mut worst = 0.0f64;
    let mut count = 0;
    'grid: for i in 1..=side {
        for j in 1..=side {
            if count == cfg.decomposition_points {
                break 'grid;
            }
            count += 1;
            let x = 0.37 * i as f64;
            let a = x + 0.53 * j as f64;
            let (l1, l2) = l_decomposition(a - x, x);
            let m = ruin_moments_closed_form(x, a)?;
            worst = worst.max(((l1 - m.m1) / m.m1).abs()).max(((l2 - m.m2) / m.m2).abs());
        }
    }
    checks.push(check(
        "l_decomposition",
        worst,
        cfg.decomposition_tolerance,
        format!("max relative gap over {count} (d, x) points"),
    ));

    let mut worst = 0.0f64;
    let mut at = (0, 0);
    for a in 2..=cfg.chain_max_barrier {
        for x in 1..a {
            let m = ruin_moments_chain_oracle(x, a)?;
            let err = (m.m1 - (f64::from(a * a) - f64::from(x * x)) / 3.0).abs();
            if err > worst {
                worst = err;
                at = (x, a);
            }
        }
    }
    checks.push(check(
        "chain_oracle_mean",
        worst,
        cfg.chain_tolerance,
        format!("max |m1 − (a²−x²)/3| for 0 < x < a ≤ {} (worst at {at:?})", cfg.chain_max_barrier),
    ));

    for &[x, a] in &cfg.laplace_points {
        let exact = ruin_moments_closed_form(x, a)?;
        let (m1, m2) = laplace_moment_check(x, a, cfg.laplace_step)?;
        checks.push(check(
            &format!("laplace_m1(x={x},a={a})"),
            (m1 - exact.m1).abs(),
            cfg.laplace_m1_tolerance,
            format!("estimate {m1} vs {}", exact.m1),
        ));
        checks.push(check(
            &format!("laplace_m2(x={x},a={a})"),
            (m2 - exact.m2).abs(),
            cfg.laplace_m2_tolerance,
            format!("estimate {m2} vs {}", exact.m2),
        ));
    }

    let g = check_psi_growth_condition(
        &cfg.psi,
        cfg.theta,
        cfg.a,
        (cfg.z_range[0], cfg.z_range[1]),
        cfg.z_points,
    )?;
    checks.push(CheckResult {
        name: "psi_growth_condition".into(),
        passed: g.holds,
        value: g.min_margin,
        tolerance: 0.0,
        detail: match g.first_violation {
            Some(z) => format!("first violation at z = {z}"),
            None => format!("min margin at z = {}", g.argmin),
        },
    });

    let profile = match tail_ratio_limit(&cfg.psi) {
        Some(limit) => {
            let r = tail_ratio(&cfg.psi, cfg.ratio_n)?;
            checks.push(check(
                "tail_ratio",
                (r - limit).abs(),
                cfg.ratio_tolerance,
                format!("ratio {r} at n = {} vs limit {limit}", cfg.ratio_n),
            ));
            let p = liminf_ratio_profile(&cfg.psi, cfg.profile_n_max, cfg.profile_per_decade)?;
            checks.push(CheckResult {
                name: "ratio_profile_positive".into(),
                passed: p.liminf_estimate > 0.0,
                value: p.liminf_estimate,
                tolerance: 0.0,
                detail: format!("running infimum up to n = {}", cfg.profile_n_max),
            });
            Some(p)
        }
        None => None,
    };

    let d = check_tail_domination(
        &cfg.psi,
        cfg.theta,
        (cfg.domination_range[0], cfg.domination_range[1]),
        cfg.domination_points,
    )?;
    checks.push(CheckResult {
        name: "tail_domination".into(),
        passed: d.holds,
        value: d.min_log_slack,
        tolerance: 0.0,
        detail: if d.holds {
            "min ln(shifted tail / tail)".into()
        } else {
            format!("violations at n = {:?}", d.violations)
        },
    });

    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
        ratio_profile: profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_battery_passes() {
        let r = run_verify(&VerifyConfig::default()).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(r.passed);
        assert!(r.ratio_profile.is_some());
    }

    #[test]
    fn short_z_range_fails() {
        let cfg = VerifyConfig {
            z_range: [4f64.exp(), 1e6],
            ..Default::default()
        };
        let r = run_verify(&cfg).unwrap();
        assert!(!r.passed);
        let g = r.checks.iter().find(|c| c.name == "psi_growth_condition").unwrap();
        assert!(!g.passed && g.value < 0.0);
    }

    #[test]
    fn limits() {
        assert_eq!(tail_ratio_limit(&GrowthFn::power(2.0)), Some(1.0 / 3.0));
        assert_eq!(tail_ratio_limit(&GrowthFn::power(1.0)), None);
    }

    #[test]
    fn invalid_rejected() {
        let cfg = VerifyConfig {
            a: 0.5,
            ..Default::default()
        };
        assert!(run_verify(&cfg).is_err());
    }
}
