//! Finite-horizon surrogates for "eventually on one edge" and "one colour
//! drawn finitely often".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PolygonGraph;
use crate::urn::{Color, UrnRun};
use crate::walker::Trajectory;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticleLocalization {
    pub particle: usize,
    pub localized: bool,
    pub edge: Option<usize>,
    /// First time from which the particle stayed on the endpoints of `edge`.
    pub onset: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub horizon: u64,
    pub window: u64,
    pub particles: Vec<ParticleLocalization>,
}

impl LocalizationReport {
    pub fn all_localized(&self) -> bool {
        self.particles.iter().all(|p| p.localized)
    }
}

fn check_window(window: u64, available: u64) -> Result<()> {
    if window == 0 || window > available {
        return Err(Error::param(
            "window",
            format!("must be in 1..={available}, got {window}"),
        ));
    }
    Ok(())
}

/// Localization of one path: the last `window` moves all cross the same
/// edge (equivalently, the last `window + 1` positions sit on its two
/// endpoints).
pub fn localize_path(
    graph: &PolygonGraph,
    particle: usize,
    path: &[usize],
    window: u64,
) -> Result<ParticleLocalization> {
    let horizon = path.len() as u64 - 1;
    check_window(window, horizon)?;
    let h = path.len() - 1;
    let edge = graph.edge_between(path[h - 1], path[h])?;
    let (a, b) = graph.endpoints(edge)?;
    let on_edge = |x: usize| x == a || x == b;
    let start = path.iter().rposition(|&x| !on_edge(x)).map_or(0, |i| i + 1);
    let localized = (h - start) as u64 >= window;
    Ok(ParticleLocalization {
        particle,
        localized,
        edge: localized.then_some(edge),
        onset: localized.then_some(start as u64),
    })
}

/// Localization over the full trajectory.
pub fn detect_localization(trajectory: &Trajectory, window: u64) -> Result<LocalizationReport> {
    detect_localization_at(trajectory, trajectory.horizon(), window)
}

/// Localization judged on the prefix of the trajectory up to `horizon`.
pub fn detect_localization_at(
    trajectory: &Trajectory,
    horizon: u64,
    window: u64,
) -> Result<LocalizationReport> {
    if horizon > trajectory.horizon() {
        return Err(Error::param("horizon", "beyond the simulated trajectory"));
    }
    let graph = PolygonGraph::new(trajectory.vertices())?;
    let particles = (0..trajectory.particles())
        .map(|l| {
            let path: Vec<usize> = trajectory.path(l).take(horizon as usize + 1).collect();
            localize_path(&graph, l, &path, window)
        })
        .collect::<Result<_>>()?;
    Ok(LocalizationReport {
        horizon,
        window,
        particles,
    })
}

/// The colour of the last `window` draws if they all agree.
pub fn detect_monochromatic_tail(draws: &[Color], window: u64) -> Result<Option<Color>> {
    check_window(window, draws.len() as u64)?;
    let tail = &draws[draws.len() - window as usize..];
    let first = tail[0];
    Ok(tail.iter().all(|&c| c == first).then_some(first))
}

/// `(1/2)·⌊ln n⌋ + 1`
pub fn log_gap_threshold(n: u64) -> f64 {
    0.5 * (n as f64).ln().floor() + 1.0
}

/// Steps n ≥ 1 at which `|φ_1(n) − φ_2(n)| ≥ (1/2)⌊ln n⌋ + 1`.
pub fn log_gap_crossings(run: &UrnRun) -> Vec<u64> {
    run.compositions
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(n, c)| c[0].abs_diff(c[1]) as f64 >= log_gap_threshold(*n as u64))
        .map(|(n, _)| n as u64)
        .collect()
}
