//! Interaction kernels: the bounded "other factors" Ξ added to a particle's
//! own traversal counts before reinforcement.
//!
//! Every kernel certifies a uniform bound `R` through
//! [`InteractionKernel::bound`]; the walker checks it on every step.

use std::sync::{Arc, OnceLock};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::registry::{parse_params, Registry, StrategySpec};

/// Kernel values `Ξ[ℓ][j]` (row-major, `particles × edges`) plus whatever
/// bookkeeping the variant needs.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelState {
    particles: usize,
    edges: usize,
    step: u64,
    values: Vec<f64>,
    /// τ[ℓ][j]: last step strictly before the current one at which particle
    /// ℓ crossed edge j, 0 if none. Only the recency kernel keeps these.
    recency_marks: Option<Vec<u64>>,
    latest: Option<Vec<u64>>,
}

impl KernelState {
    fn zeros(particles: usize, edges: usize) -> Self {
        Self {
            particles,
            edges,
            step: 0,
            values: vec![0.0; particles * edges],
            recency_marks: None,
            latest: None,
        }
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn edges(&self) -> usize {
        self.edges
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    #[inline]
    pub fn value(&self, particle: usize, edge: usize) -> f64 {
        self.values[particle * self.edges + edge]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn recency_marks(&self) -> Option<&[u64]> {
        self.recency_marks.as_deref()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    fn check_events(&self, traversed: &[usize]) -> Result<()> {
        if traversed.len() != self.particles {
            return Err(Error::EventArity {
                expected: self.particles,
                got: traversed.len(),
            });
        }
        if let Some(&bad) = traversed.iter().find(|&&e| e >= self.edges) {
            return Err(Error::VertexOutOfRange {
                vertex: bad,
                vertices: self.edges,
            });
        }
        Ok(())
    }
}

pub trait InteractionKernel: std::fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Uniform bound on every reachable `Ξ[ℓ][j]` for `particles` walkers.
    fn bound(&self, particles: usize) -> f64;

    fn init(&self, particles: usize, edges: usize) -> Result<KernelState>;

    /// Consume the edges crossed at the step just taken, one per particle.
    fn update(&self, state: &mut KernelState, traversed: &[usize]) -> Result<()>;
}

/// Functional form of [`InteractionKernel::update`].
pub fn kernel_update(
    kernel: &dyn InteractionKernel,
    state: &KernelState,
    traversed: &[usize],
) -> Result<KernelState> {
    let mut next = state.clone();
    kernel.update(&mut next, traversed)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroKernel;

impl InteractionKernel for ZeroKernel {
    fn name(&self) -> &'static str {
        "zero"
    }

    fn bound(&self, _particles: usize) -> f64 {
        0.0
    }

    fn init(&self, particles: usize, edges: usize) -> Result<KernelState> {
        Ok(KernelState::zeros(particles, edges))
    }

    fn update(&self, state: &mut KernelState, traversed: &[usize]) -> Result<()> {
        state.check_events(traversed)?;
        state.step += 1;
        Ok(())
    }
}

/// Exponentially discounted count of the other particles' crossings:
/// `Ξ[ℓ][j] ← base^(−β)·Ξ[ℓ][j] + #{κ ≠ ℓ crossing j now}`.
///
/// With two particles each walker may carry its own rate; the deposit of
/// particle κ then decays at `base^(−β_κ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpDiscountKernel {
    beta: f64,
    per_particle: Option<[f64; 2]>,
    base: f64,
}

impl ExpDiscountKernel {
    pub fn new(beta: f64) -> Result<Self> {
        Self::with_base(beta, std::f64::consts::E)
    }

    pub fn with_base(beta: f64, base: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param("beta", format!("must be > 0, got {beta}")));
        }
        if !(base > 1.0 && base.is_finite()) {
            return Err(Error::param("base", format!("must be > 1, got {base}")));
        }
        Ok(Self {
            beta,
            per_particle: None,
            base,
        })
    }

    /// Two-particle system with discount rate `betas[κ]` on particle κ's trail.
    pub fn asymmetric(betas: [f64; 2], base: f64) -> Result<Self> {
        let mut k = Self::with_base(betas[0], base)?;
        Self::with_base(betas[1], base)?;
        k.per_particle = Some(betas);
        Ok(k)
    }

    /// Multiplier applied each step to particle `particle`'s kernel row.
    fn decay(&self, particle: usize) -> f64 {
        let beta = match self.per_particle {
            Some(b) => b[1 - particle],
            None => self.beta,
        };
        self.base.powf(-beta)
    }
}

impl InteractionKernel for ExpDiscountKernel {
    fn name(&self) -> &'static str {
        "exp_discount"
    }

    // Each step adds at most K−1 indicators to a row, so the row is bounded by
    // the geometric series (K−1)·Σ d^t = (K−1)/(1−d).
    fn bound(&self, particles: usize) -> f64 {
        let others = particles.saturating_sub(1) as f64;
        let slowest = match self.per_particle {
            Some(_) => self.decay(0).max(self.decay(1)),
            None => self.decay(0),
        };
        others / (1.0 - slowest)
    }

    fn init(&self, particles: usize, edges: usize) -> Result<KernelState> {
        if self.per_particle.is_some() && particles != 2 {
            return Err(Error::param(
                "betas",
                format!("per-particle rates need exactly 2 particles, got {particles}"),
            ));
        }
        Ok(KernelState::zeros(particles, edges))
    }

    fn update(&self, state: &mut KernelState, traversed: &[usize]) -> Result<()> {
        state.check_events(traversed)?;
        let edges = state.edges;
        for (l, row) in state.values.chunks_exact_mut(edges).enumerate() {
            let d = self.decay(l);
            row.iter_mut().for_each(|x| *x *= d);
            for (k, &e) in traversed.iter().enumerate() {
                if k != l {
                    row[e] += 1.0;
                }
            }
        }
        state.step += 1;
        Ok(())
    }
}

/// Counts the other particles whose most recent crossing of an edge is no
/// older than this particle's own. Crossing times are lagged one step, and
/// ties include the never-crossed mark 0, so every entry starts at K−1.
#[derive(Debug, Clone, Copy, Default)]
pub struct RecencyKernel;

impl InteractionKernel for RecencyKernel {
    fn name(&self) -> &'static str {
        "recency"
    }

    fn bound(&self, particles: usize) -> f64 {
        particles.saturating_sub(1) as f64
    }

    fn init(&self, particles: usize, edges: usize) -> Result<KernelState> {
        let mut s = KernelState::zeros(particles, edges);
        s.recency_marks = Some(vec![0; particles * edges]);
        s.latest = Some(vec![0; particles * edges]);
        s.values.fill(particles.saturating_sub(1) as f64);
        Ok(s)
    }

    fn update(&self, state: &mut KernelState, traversed: &[usize]) -> Result<()> {
        state.check_events(traversed)?;
        let (p, e) = (state.particles, state.edges);
        let now = state.step + 1;
        let (Some(marks), Some(latest)) = (state.recency_marks.as_mut(), state.latest.as_mut())
        else {
            return Err(Error::Domain("recency state missing marks".into()));
        };
        // τ(s+1) only sees crossings up to step s.
        marks.copy_from_slice(latest);
        for (l, &edge) in traversed.iter().enumerate() {
            latest[l * e + edge] = now;
        }
        for l in 0..p {
            for j in 0..e {
                let own = marks[l * e + j];
                let count = (0..p)
                    .filter(|&k| k != l && marks[k * e + j] >= own)
                    .count();
                state.values[l * e + j] = count as f64;
            }
        }
        state.step = now;
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpDiscountParams {
    beta: Option<f64>,
    betas: Option<[f64; 2]>,
    base: Option<f64>,
}

fn build_exp_discount(params: &crate::registry::Params) -> Result<Arc<dyn InteractionKernel>> {
    let p: ExpDiscountParams = parse_params("exp_discount", params)?;
    let base = p.base.unwrap_or(std::f64::consts::E);
    let kernel = match (p.beta, p.betas) {
        (Some(beta), None) => ExpDiscountKernel::with_base(beta, base)?,
        (None, Some(betas)) => ExpDiscountKernel::asymmetric(betas, base)?,
        (Some(_), Some(_)) => {
            return Err(Error::param("exp_discount", "give either `beta` or `betas`, not both"))
        }
        (None, None) => return Err(Error::param("exp_discount", "missing `beta` (or `betas`)")),
    };
    Ok(Arc::new(kernel))
}

pub fn registry() -> &'static Registry<dyn InteractionKernel> {
    static REGISTRY: OnceLock<Registry<dyn InteractionKernel>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut r: Registry<dyn InteractionKernel> = Registry::new("kernel");
        r.register("zero", "no interaction, Ξ ≡ 0", |p| {
            parse_params::<NoParams>("zero", p)?;
            Ok(Arc::new(ZeroKernel))
        });
        r.register(
            "exp_discount",
            "time-discounted crossings of the other particles (beta | betas, base)",
            build_exp_discount,
        );
        r.register(
            "recency",
            "number of other particles that crossed the edge at least as recently",
            |p| {
                parse_params::<NoParams>("recency", p)?;
                Ok(Arc::new(RecencyKernel))
            },
        );
        r
    })
}

pub fn build(spec: &StrategySpec) -> Result<Arc<dyn InteractionKernel>> {
    registry().build(spec)
}
