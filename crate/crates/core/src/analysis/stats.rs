//! Binomial intervals and χ² tests used by the Monte Carlo checks.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Minimum expected count per pooled cell.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson score interval at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Proportion {
    if trials == 0 {
        return Proportion {
            successes,
            trials,
            fraction: f64::NAN,
            ci_low: 0.0,
            ci_high: 1.0,
        };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Proportion {
        successes,
        trials,
        fraction: p,
        ci_low: if successes == 0 { 0.0 } else { (centre - half).max(0.0) },
        ci_high: if successes == trials { 1.0 } else { (centre + half).min(1.0) },
    }
}

/// 95% Wilson interval.
pub fn proportion(successes: u64, trials: u64) -> Proportion {
    wilson_interval(successes, trials, 1.959_963_984_540_054)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Cells after pooling.
    pub bins: usize,
}

fn p_value(statistic: f64, dof: usize) -> Result<f64> {
    if dof == 0 {
        return Ok(1.0);
    }
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dist.sf(statistic))
}

/// Groups cell indices, in ascending order of `weight`, into bins whose total
/// weight is at least `min`. A short final group is merged into its predecessor.
fn pool(weights: &[f64], min: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
    let mut bins: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::new();
    let mut acc = 0.0;
    for i in order {
        current.push(i);
        acc += weights[i];
        if acc >= min {
            bins.push(std::mem::take(&mut current));
            acc = 0.0;
        }
    }
    if !current.is_empty() {
        match bins.last_mut() {
            Some(last) => last.extend(current),
            None => bins.push(current),
        }
    }
    bins
}

/// Pearson goodness of fit of `observed` counts against cell probabilities.
/// Cells with expected count below [`MIN_EXPECTED`] are pooled.
pub fn chi_square_goodness_of_fit(observed: &[u64], probabilities: &[f64]) -> Result<ChiSquareResult> {
    if observed.len() != probabilities.len() {
        return Err(Error::param("probabilities", "length differs from observed"));
    }
    let n: u64 = observed.iter().sum();
    let expected: Vec<f64> = probabilities.iter().map(|p| p * n as f64).collect();
    let stray: u64 = observed
        .iter()
        .zip(probabilities)
        .filter(|(_, &p)| p <= 0.0)
        .map(|(&o, _)| o)
        .sum();
    if stray > 0 {
        return Ok(ChiSquareResult {
            statistic: f64::INFINITY,
            dof: 0,
            p_value: 0.0,
            bins: 0,
        });
    }
    let bins = pool(&expected, MIN_EXPECTED);
    let statistic: f64 = bins
        .iter()
        .map(|b| {
            let o: f64 = b.iter().map(|&i| observed[i] as f64).sum();
            let e: f64 = b.iter().map(|&i| expected[i]).sum();
            (o - e) * (o - e) / e
        })
        .sum();
    let dof = bins.len().saturating_sub(1);
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: p_value(statistic, dof)?,
        bins: bins.len(),
    })
}

/// Pearson χ² homogeneity test of two count vectors over the same cells.
/// Cells are pooled until each sample's expected count is at least
/// [`MIN_EXPECTED`].
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquareResult> {
    if a.len() != b.len() {
        return Err(Error::param("b", "length differs from first sample"));
    }
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return Err(Error::param("samples", "both samples must be non-empty"));
    }
    let total = (na + nb) as f64;
    let share = (na.min(nb)) as f64 / total;
    let combined: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| (x + y) as f64).collect();
    // expected count in the smaller sample is combined·share
    let bins = pool(&combined, MIN_EXPECTED / share);
    let mut statistic = 0.0;
    for bin in &bins {
        let oa: f64 = bin.iter().map(|&i| a[i] as f64).sum();
        let ob: f64 = bin.iter().map(|&i| b[i] as f64).sum();
        let c = oa + ob;
        let ea = c * na as f64 / total;
        let eb = c * nb as f64 / total;
        statistic += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let dof = bins.len().saturating_sub(1);
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: p_value(statistic, dof)?,
        bins: bins.len(),
    })
}
