//! Replica-parallel estimation of localization and monopoly frequencies.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::localization::{detect_localization_at, log_gap_crossings};
use super::stats::{proportion, Proportion};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::urn::{run_urn, ReinforcementProvider, Sampler, UrnRun};
use crate::walker::{simulate_walk, Trajectory, WalkModel};

/// A model whose replicas can be simulated and scored.
#[derive(Debug, Clone)]
pub enum Experiment {
    Walk(Arc<WalkModel>),
    Urn {
        provider: Arc<dyn ReinforcementProvider>,
        start: [u64; 2],
        sampler: Sampler,
    },
}

impl Experiment {
    /// Detector scopes in output order: one per particle then `all` for
    /// walks, `monochromatic` for urns.
    pub fn scopes(&self) -> Vec<String> {
        match self {
            Experiment::Walk(m) => {
                let k = m.initial_state().particles();
                (0..k)
                    .map(|l| format!("particle_{l}"))
                    .chain(std::iter::once("all".to_owned()))
                    .collect()
            }
            Experiment::Urn { .. } => vec!["monochromatic".to_owned()],
        }
    }

    /// One replica to `horizon` on stream `replica` of `base_seed`.
    pub fn simulate(&self, base_seed: u64, replica: u64, horizon: u64) -> Result<Run> {
        let mut rng = RngStream::new(base_seed, replica).rng();
        match self {
            Experiment::Walk(m) => Ok(Run::Walk(simulate_walk(m, horizon, &mut rng)?)),
            Experiment::Urn {
                provider,
                start,
                sampler,
            } => Ok(Run::Urn(run_urn(
                provider.as_ref(),
                *start,
                horizon,
                *sampler,
                &mut rng,
            )?)),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Run {
    Walk(Trajectory),
    Urn(UrnRun),
}

impl Run {
    pub fn horizon(&self) -> u64 {
        match self {
            Run::Walk(t) => t.horizon(),
            Run::Urn(u) => u.horizon(),
        }
    }

    /// Detector outcomes on the prefix up to `horizon`, one per scope.
    pub fn detect(&self, horizon: u64, window: u64) -> Result<Vec<Detection>> {
        match self {
            Run::Walk(t) => {
                let report = detect_localization_at(t, horizon, window)?;
                let mut out: Vec<Detection> = report
                    .particles
                    .iter()
                    .map(|p| Detection {
                        detected: p.localized,
                        onset: p.onset,
                        label: p.edge.map(|e| e.to_string()),
                    })
                    .collect();
                let all = report.all_localized();
                out.push(Detection {
                    detected: all,
                    onset: all.then(|| out.iter().filter_map(|d| d.onset).max().unwrap_or(0)),
                    label: None,
                });
                Ok(out)
            }
            Run::Urn(u) => {
                if window == 0 || window > horizon || horizon > u.horizon() {
                    return Err(Error::param(
                        "window",
                        format!("need 1 ≤ window ≤ horizon ≤ {}", u.horizon()),
                    ));
                }
                let prefix = &u.draws[..horizon as usize];
                let last = prefix[prefix.len() - 1];
                let onset = prefix.iter().rposition(|&c| c != last).map_or(0, |i| i as u64 + 1);
                let detected = horizon - onset >= window;
                Ok(vec![Detection {
                    detected,
                    onset: detected.then_some(onset),
                    label: detected.then(|| last.as_str().to_owned()),
                }])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub detected: bool,
    /// Steps completed before the detected pattern began.
    pub onset: Option<u64>,
    /// Localized edge or monopolizing colour.
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub horizon: u64,
    pub window: u64,
    /// Indexed like [`Experiment::scopes`].
    pub detections: Vec<Detection>,
}

/// Per-replica summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaOutcome {
    pub replica: u64,
    pub probes: Vec<Probe>,
    /// Largest kernel entry seen; 0 for urns.
    pub max_kernel_value: f64,
    /// Log-gap threshold crossings over the full run; urns only.
    pub gap_crossings: Option<u64>,
    /// Steps where a modulator offset hit its cap; urns only.
    pub capped_steps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractionRow {
    pub horizon: u64,
    pub window: u64,
    pub scope: String,
    #[serde(flatten)]
    pub proportion: Proportion,
    pub mean_onset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractionReport {
    pub replicas: u64,
    pub base_seed: u64,
    pub rows: Vec<AttractionRow>,
    /// Detection fraction nondecreasing in horizon for every (window, scope).
    pub monotone: bool,
    pub max_kernel_value: f64,
    pub kernel_bound: Option<f64>,
    pub kernel_violations: u64,
    pub outcomes: Vec<ReplicaOutcome>,
}

impl AttractionReport {
    pub fn row(&self, horizon: u64, window: u64, scope: &str) -> Option<&AttractionRow> {
        self.rows
            .iter()
            .find(|r| r.horizon == horizon && r.window == window && r.scope == scope)
    }
}

/// Valid (horizon, window) pairs in horizon-major order.
fn probe_grid(horizons: &[u64], windows: &[u64]) -> Result<Vec<(u64, u64)>> {
    if horizons.is_empty() || windows.is_empty() {
        return Err(Error::param("horizons", "need at least one horizon and window"));
    }
    let mut hs = horizons.to_vec();
    hs.sort_unstable();
    hs.dedup();
    let mut ws = windows.to_vec();
    ws.sort_unstable();
    ws.dedup();
    if ws[0] == 0 {
        return Err(Error::param("windows", "must be ≥ 1"));
    }
    let grid: Vec<_> = hs
        .iter()
        .flat_map(|&h| ws.iter().filter(move |&&w| w <= h).map(move |&w| (h, w)))
        .collect();
    if grid.is_empty() {
        return Err(Error::param("windows", "every window exceeds every horizon"));
    }
    Ok(grid)
}

/// Scores one replica at every probe.
pub fn score_replica(
    experiment: &Experiment,
    base_seed: u64,
    replica: u64,
    grid: &[(u64, u64)],
) -> Result<ReplicaOutcome> {
    let horizon = grid.iter().map(|p| p.0).max().unwrap_or(0);
    let run = experiment.simulate(base_seed, replica, horizon)?;
    let probes = grid
        .iter()
        .map(|&(h, w)| {
            Ok(Probe {
                horizon: h,
                window: w,
                detections: run.detect(h, w)?,
            })
        })
        .collect::<Result<_>>()?;
    let (max_kernel_value, gap_crossings, capped_steps) = match &run {
        Run::Walk(t) => (t.max_kernel_value, None, None),
        Run::Urn(u) => (0.0, Some(log_gap_crossings(u).len() as u64), Some(u.capped_steps)),
    };
    Ok(ReplicaOutcome {
        replica,
        probes,
        max_kernel_value,
        gap_crossings,
        capped_steps,
    })
}

/// Fraction of replicas whose detector fires at each (horizon, window,
/// scope), with 95% Wilson intervals. Each replica is simulated once to the
/// largest horizon and scored on prefixes; replica r uses stream r.
pub fn estimate_attraction(
    experiment: &Experiment,
    replicas: u64,
    horizons: &[u64],
    windows: &[u64],
    base_seed: u64,
) -> Result<AttractionReport> {
    if replicas == 0 {
        return Err(Error::param("replicas", "must be ≥ 1"));
    }
    let grid = probe_grid(horizons, windows)?;
    let outcomes: Vec<ReplicaOutcome> = (0..replicas)
        .into_par_iter()
        .map(|r| score_replica(experiment, base_seed, r, &grid))
        .collect::<Result<_>>()?;
    Ok(aggregate(experiment, base_seed, &grid, outcomes))
}

fn aggregate(
    experiment: &Experiment,
    base_seed: u64,
    grid: &[(u64, u64)],
    outcomes: Vec<ReplicaOutcome>,
) -> AttractionReport {
    let scopes = experiment.scopes();
    let mut rows = Vec::with_capacity(grid.len() * scopes.len());
    for (pi, &(h, w)) in grid.iter().enumerate() {
        for (si, scope) in scopes.iter().enumerate() {
            let hits: Vec<&Detection> = outcomes
                .iter()
                .map(|o| &o.probes[pi].detections[si])
                .filter(|d| d.detected)
                .collect();
            let onsets: Vec<f64> = hits.iter().filter_map(|d| d.onset).map(|x| x as f64).collect();
            rows.push(AttractionRow {
                horizon: h,
                window: w,
                scope: scope.clone(),
                proportion: proportion(hits.len() as u64, outcomes.len() as u64),
                mean_onset: (!onsets.is_empty())
                    .then(|| onsets.iter().sum::<f64>() / onsets.len() as f64),
            });
        }
    }
    let monotone = rows.iter().all(|r| {
        rows.iter()
            .filter(|s| s.window == r.window && s.scope == r.scope && s.horizon > r.horizon)
            .all(|s| s.proportion.fraction >= r.proportion.fraction)
    });
    let max_kernel_value = outcomes
        .iter()
        .map(|o| o.max_kernel_value)
        .fold(0.0, f64::max);
    let kernel_bound = match experiment {
        Experiment::Walk(m) => Some(m.kernel_bound()),
        Experiment::Urn { .. } => None,
    };
    let kernel_violations = kernel_bound.map_or(0, |b| {
        outcomes.iter().filter(|o| o.max_kernel_value > b).count() as u64
    });
    AttractionReport {
        replicas: outcomes.len() as u64,
        base_seed,
        rows,
        monotone,
        max_kernel_value,
        kernel_bound,
        kernel_violations,
        outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::GrowthFn;
    use crate::kernels::ZeroKernel;
    use crate::registry::StrategySpec;
    use crate::urn::{Color, FunctionUrn};
    use crate::walker::{InitialWeights, WalkConfig};

    fn triangle(particles: usize, kernel: StrategySpec) -> WalkConfig {
        WalkConfig {
            vertices: 3,
            particles,
            alpha: 2.0,
            initial_positions: vec![0; particles],
            initial_weights: InitialWeights::default(),
            kernel,
        }
    }

    fn urn(g: GrowthFn) -> Experiment {
        Experiment::Urn {
            provider: Arc::new(FunctionUrn::symmetric(g).unwrap()),
            start: [1, 1],
            sampler: Sampler::Direct,
        }
    }

    #[test]
    fn grid_drops_oversized_windows() {
        let g = probe_grid(&[100, 10], &[50, 5]).unwrap();
        assert_eq!(g, vec![(10, 5), (100, 5), (100, 50)]);
        assert!(probe_grid(&[10], &[50]).is_err());
        assert!(probe_grid(&[10], &[0]).is_err());
    }

    #[test]
    fn urn_prefix_detection() {
        let run = Run::Urn(UrnRun {
            start: [1, 1],
            draws: vec![Color::White, Color::Red, Color::Red, Color::Red, Color::White],
            compositions: vec![],
            ln_weights: vec![],
            capped_steps: 0,
            final_state: crate::urn::UrnState::new(
                [1, 1],
                &FunctionUrn::symmetric(GrowthFn::power(1.0)).unwrap(),
            )
            .unwrap(),
        });
        let d = run.detect(4, 3).unwrap();
        assert!(d[0].detected);
        assert_eq!(d[0].onset, Some(1));
        assert_eq!(d[0].label.as_deref(), Some("red"));
        assert!(!run.detect(4, 4).unwrap()[0].detected);
        assert!(run.detect(5, 1).unwrap()[0].detected);
        assert!(run.detect(6, 1).is_err());
    }

    #[test]
    fn deterministic_and_ordered() {
        let e = urn(GrowthFn::power(2.0));
        let a = estimate_attraction(&e, 16, &[200], &[50], 9).unwrap();
        let b = estimate_attraction(&e, 16, &[200], &[50], 9).unwrap();
        assert_eq!(a, b);
        assert!(a.outcomes.iter().enumerate().all(|(i, o)| o.replica == i as u64));
        assert_eq!(a.rows.len(), 1);
        assert_eq!(a.kernel_bound, None);
    }

    #[test]
    fn squared_urn_mostly_monopolized() {
        let r = estimate_attraction(&urn(GrowthFn::power(2.0)), 200, &[2_000], &[1_000], 1).unwrap();
        assert!(r.rows[0].proportion.fraction > 0.9, "{:?}", r.rows[0]);
        let polya = estimate_attraction(&urn(GrowthFn::power(1.0)), 200, &[2_000], &[1_000], 1).unwrap();
        assert!(polya.rows[0].proportion.fraction < 0.05, "{:?}", polya.rows[0]);
    }

    #[test]
    fn walk_rows_and_kernel_bound() {
        let cfg = triangle(2, StrategySpec::new("exp_discount").with("beta", 1.0));
        let e = Experiment::Walk(Arc::new(WalkModel::new(&cfg).unwrap()));
        let r = estimate_attraction(&e, 8, &[100, 400], &[50], 4).unwrap();
        assert_eq!(e.scopes(), ["particle_0", "particle_1", "all"]);
        assert_eq!(r.rows.len(), 6);
        assert_eq!(r.kernel_violations, 0);
        assert!(r.max_kernel_value <= r.kernel_bound.unwrap());
        for o in &r.outcomes {
            let p = &o.probes[0].detections;
            assert_eq!(p[2].detected, p[0].detected && p[1].detected);
        }
    }

    #[test]
    fn single_walker_localizes() {
        let cfg = triangle(1, StrategySpec::new("zero"));
        let model = WalkModel::with_kernel(&cfg, Arc::new(ZeroKernel)).unwrap();
        let r = estimate_attraction(&Experiment::Walk(Arc::new(model)), 100, &[2_000], &[500], 2).unwrap();
        assert!(r.row(2_000, 500, "particle_0").unwrap().proportion.fraction > 0.9);
    }
}
