//! K interacting reinforced walkers on a polygon.
//!
//! Particle ℓ at vertex j steps to j ⊕ 1 with probability
//! `T[ℓ][j] / (T[ℓ][j] + T[ℓ][j ⊖ 1])`, where
//! `T[ℓ][e] = (N[ℓ][e] + Ξ[ℓ][e])^α`. All particles move simultaneously
//! and independently given the current state; the kernel then absorbs the
//! realized crossings.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PolygonGraph;
use crate::kernels::{self, InteractionKernel, KernelState};
use crate::registry::StrategySpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialWeights {
    Uniform(u64),
    PerParticle(Vec<Vec<u64>>),
}

impl Default for InitialWeights {
    fn default() -> Self {
        InitialWeights::Uniform(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    pub vertices: usize,
    pub particles: usize,
    pub alpha: f64,
    pub initial_positions: Vec<usize>,
    #[serde(default)]
    pub initial_weights: InitialWeights,
    pub kernel: StrategySpec,
}

/// Markov state: positions, traversal counts and kernel values.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub positions: Vec<usize>,
    /// `N[ℓ][j]`, row-major `particles × edges`.
    pub traversals: Vec<u64>,
    pub kernel: KernelState,
    pub step: u64,
}

impl SystemState {
    pub fn particles(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn traversal(&self, particle: usize, edge: usize) -> u64 {
        self.traversals[particle * self.kernel.edges() + edge]
    }

    #[inline]
    pub fn kernel_value(&self, particle: usize, edge: usize) -> f64 {
        self.kernel.value(particle, edge)
    }

    #[inline]
    fn base(&self, particle: usize, edge: usize) -> f64 {
        self.traversal(particle, edge) as f64 + self.kernel_value(particle, edge)
    }
}

/// `(T_right, T_left)` for particle ℓ at its current vertex j: the weights of
/// edge j (towards j ⊕ 1) and edge j ⊖ 1 (towards j ⊖ 1).
pub fn reinforcement_weights(
    graph: &PolygonGraph,
    state: &SystemState,
    alpha: f64,
    particle: usize,
) -> (f64, f64) {
    let j = state.positions[particle];
    (
        state.base(particle, j).powf(alpha),
        state.base(particle, graph.pred(j)).powf(alpha),
    )
}

/// Clockwise probability from the two bases, with the larger one factored
/// out so that huge `alpha` cannot overflow.
#[inline]
pub fn clockwise_from_bases(right: f64, left: f64, alpha: f64) -> f64 {
    if right >= left {
        1.0 / (1.0 + (left / right).powf(alpha))
    } else {
        let r = (right / left).powf(alpha);
        r / (1.0 + r)
    }
}

#[inline]
pub fn clockwise_from_weights(t_right: f64, t_left: f64) -> f64 {
    t_right / (t_right + t_left)
}

pub fn transition_probability(
    graph: &PolygonGraph,
    state: &SystemState,
    alpha: f64,
    particle: usize,
) -> f64 {
    let j = state.positions[particle];
    clockwise_from_bases(
        state.base(particle, j),
        state.base(particle, graph.pred(j)),
        alpha,
    )
}

/// A validated walk configuration, ready to simulate.
#[derive(Debug, Clone)]
pub struct WalkModel {
    graph: PolygonGraph,
    alpha: f64,
    kernel: Arc<dyn InteractionKernel>,
    bound: f64,
    initial: SystemState,
}

impl WalkModel {
    pub fn new(config: &WalkConfig) -> Result<Self> {
        let kernel = kernels::build(&config.kernel)?;
        Self::with_kernel(config, kernel)
    }

    pub fn with_kernel(config: &WalkConfig, kernel: Arc<dyn InteractionKernel>) -> Result<Self> {
        let graph = PolygonGraph::new(config.vertices)?;
        let (k, v) = (config.particles, config.vertices);
        if k == 0 {
            return Err(Error::param("particles", "must be ≥ 1"));
        }
        if !(config.alpha > 0.0 && config.alpha.is_finite()) {
            return Err(Error::param(
                "alpha",
                format!("must be a finite real > 0, got {}", config.alpha),
            ));
        }
        if config.initial_positions.len() != k {
            return Err(Error::param(
                "initial_positions",
                format!("need {k} entries, got {}", config.initial_positions.len()),
            ));
        }
        if let Some(&bad) = config.initial_positions.iter().find(|&&x| x >= v) {
            return Err(Error::param(
                "initial_positions",
                format!("vertex {bad} not in 0..{v}"),
            ));
        }
        let traversals = match &config.initial_weights {
            InitialWeights::Uniform(w) => vec![*w; k * v],
            InitialWeights::PerParticle(rows) => {
                if rows.len() != k || rows.iter().any(|r| r.len() != v) {
                    return Err(Error::param(
                        "initial_weights",
                        format!("need a {k}×{v} matrix"),
                    ));
                }
                rows.concat()
            }
        };
        if traversals.contains(&0) {
            return Err(Error::param("initial_weights", "entries must be ≥ 1"));
        }
        let initial = SystemState {
            positions: config.initial_positions.clone(),
            traversals,
            kernel: kernel.init(k, v)?,
            step: 0,
        };
        let bound = kernel.bound(k);
        Ok(Self {
            graph,
            alpha: config.alpha,
            kernel,
            bound,
            initial,
        })
    }

    pub fn graph(&self) -> &PolygonGraph {
        &self.graph
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kernel(&self) -> &dyn InteractionKernel {
        self.kernel.as_ref()
    }

    pub fn kernel_bound(&self) -> f64 {
        self.bound
    }

    pub fn initial_state(&self) -> &SystemState {
        &self.initial
    }

    /// Advance one step. `traversed` receives the edge each particle crossed.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut SystemState,
        rng: &mut R,
        traversed: &mut Vec<usize>,
    ) -> Result<()> {
        step_system(&self.graph, self.alpha, self.kernel.as_ref(), state, rng, traversed)?;
        let max = state.kernel.max_value();
        if max > self.bound * (1.0 + 1e-12) {
            return Err(Error::KernelBound {
                value: max,
                bound: self.bound,
                step: state.step,
            });
        }
        Ok(())
    }
}

/// One synchronous step: every particle draws its move from the weights at
/// time s (all computed before anyone moves), counts update, then the kernel
/// consumes the crossings.
pub fn step_system<R: Rng + ?Sized>(
    graph: &PolygonGraph,
    alpha: f64,
    kernel: &dyn InteractionKernel,
    state: &mut SystemState,
    rng: &mut R,
    traversed: &mut Vec<usize>,
) -> Result<()> {
    let k = state.particles();
    let v = graph.len();
    traversed.clear();
    let mut clockwise = [0f64; 16];
    let mut probs = Vec::new();
    let probs: &mut [f64] = if k <= clockwise.len() {
        &mut clockwise[..k]
    } else {
        probs.resize(k, 0.0);
        &mut probs
    };
    for (l, p) in probs.iter_mut().enumerate() {
        *p = transition_probability(graph, state, alpha, l);
    }
    for (l, &p) in probs.iter().enumerate() {
        let j = state.positions[l];
        let u: f64 = rng.random();
        let (next, edge) = if u < p {
            (graph.succ(j), j)
        } else {
            let left = graph.pred(j);
            (left, left)
        };
        state.positions[l] = next;
        state.traversals[l * v + edge] += 1;
        traversed.push(edge);
    }
    kernel.update(&mut state.kernel, traversed)?;
    state.step += 1;
    Ok(())
}

/// Recorded walk: positions at every time, final state, last visit times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    particles: usize,
    vertices: usize,
    /// Row-major `(horizon + 1) × particles`.
    positions: Vec<u32>,
    pub final_state: SystemState,
    /// `last_visit[ℓ][j]`: last time ≤ horizon at which particle ℓ sat on j.
    pub last_visit: Vec<Option<u64>>,
    pub max_kernel_value: f64,
    pub kernel_bound: f64,
}

impl Trajectory {
    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn horizon(&self) -> u64 {
        (self.positions.len() / self.particles - 1) as u64
    }

    #[inline]
    pub fn position(&self, time: u64, particle: usize) -> usize {
        self.positions[time as usize * self.particles + particle] as usize
    }

    pub fn path(&self, particle: usize) -> impl Iterator<Item = usize> + '_ {
        self.positions
            .iter()
            .skip(particle)
            .step_by(self.particles)
            .map(|&x| x as usize)
    }

    /// The edge crossed by `particle` at each step `1..=horizon`.
    pub fn traversed_edges(&self, particle: usize) -> Vec<usize> {
        let g = PolygonGraph::new(self.vertices).expect("valid polygon");
        let path: Vec<usize> = self.path(particle).collect();
        path.windows(2)
            .map(|w| g.edge_between(w[0], w[1]).expect("adjacent moves"))
            .collect()
    }

    /// Rows `step,particle,position,traversed_edge`; the edge is blank at step 0.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,particle,position,traversed_edge")?;
        let g = PolygonGraph::new(self.vertices).expect("valid polygon");
        for t in 0..=self.horizon() {
            for l in 0..self.particles {
                let x = self.position(t, l);
                if t == 0 {
                    writeln!(out, "{t},{l},{x},")?;
                } else {
                    let e = g
                        .edge_between(self.position(t - 1, l), x)
                        .expect("adjacent moves");
                    writeln!(out, "{t},{l},{x},{e}")?;
                }
            }
        }
        Ok(())
    }
}

pub fn simulate_walk<R: Rng + ?Sized>(
    model: &WalkModel,
    horizon: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    let k = model.initial.particles();
    let v = model.graph.len();
    let mut state = model.initial.clone();
    let mut positions = Vec::with_capacity((horizon as usize + 1) * k);
    let mut last_visit = vec![None; k * v];
    let mut max_kernel = state.kernel.max_value();
    for (l, &x) in state.positions.iter().enumerate() {
        positions.push(x as u32);
        last_visit[l * v + x] = Some(0);
    }
    let mut traversed = Vec::with_capacity(k);
    for t in 1..=horizon {
        model.step(&mut state, rng, &mut traversed)?;
        max_kernel = max_kernel.max(state.kernel.max_value());
        for (l, &x) in state.positions.iter().enumerate() {
            positions.push(x as u32);
            last_visit[l * v + x] = Some(t);
        }
    }
    Ok(Trajectory {
        particles: k,
        vertices: v,
        positions,
        final_state: state,
        last_visit,
        max_kernel_value: max_kernel,
        kernel_bound: model.bound,
    })
}
