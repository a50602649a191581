//! Built-in reinforcement providers and their registry.

use std::sync::{Arc, OnceLock};

use rand::{Rng, RngCore};
use serde::Deserialize;

use super::{Color, ProviderState, ReinforcementProvider, RunTracker, UrnState, Weights};
use crate::error::{Error, Result};
use crate::growth::GrowthFn;
use crate::registry::{parse_params, Params, Registry, StrategySpec};

/// Weights depend on the composition only: `f_i = g_i(φ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionUrn {
    g: [GrowthFn; 2],
}

impl FunctionUrn {
    pub fn new(g_white: GrowthFn, g_red: GrowthFn) -> Result<Self> {
        g_white.validate()?;
        g_red.validate()?;
        Ok(Self { g: [g_white, g_red] })
    }

    pub fn symmetric(g: GrowthFn) -> Result<Self> {
        Self::new(g, g)
    }
}

impl ReinforcementProvider for FunctionUrn {
    fn name(&self) -> &'static str {
        "function"
    }

    fn floor(&self) -> f64 {
        self.g[0].value(1.0).min(self.g[1].value(1.0))
    }

    fn initial_state(&self) -> ProviderState {
        ProviderState::Stateless
    }

    fn next_weights(&self, state: &UrnState) -> Weights {
        Weights {
            ln: [
                self.g[0].ln_value(state.composition[0] as f64),
                self.g[1].ln_value(state.composition[1] as f64),
            ],
            capped: false,
        }
    }

    fn transitions(&self, _: &UrnState, _: Color) -> Vec<(ProviderState, f64)> {
        vec![(ProviderState::Stateless, 1.0)]
    }

    fn advance(&self, _: &UrnState, _: Color, _: &mut dyn RngCore) -> ProviderState {
        ProviderState::Stateless
    }

    fn pick_floor(&self, color: Color) -> Option<(GrowthFn, f64)> {
        Some((self.g[color.index()], 0.0))
    }
}

/// Finite homogeneous Markov chain driving the modulator offsets.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatorChain {
    pub transition: Vec<Vec<f64>>,
    #[serde(default)]
    pub initial: usize,
}

impl ModulatorChain {
    pub fn constant() -> Self {
        Self {
            transition: vec![vec![1.0]],
            initial: 0,
        }
    }

    pub fn states(&self) -> usize {
        self.transition.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.transition.len();
        if n == 0 {
            return Err(Error::param("transition", "chain needs at least one state"));
        }
        if self.initial >= n {
            return Err(Error::param("initial", format!("state {} not in 0..{n}", self.initial)));
        }
        for (i, row) in self.transition.iter().enumerate() {
            if row.len() != n {
                return Err(Error::param("transition", format!("row {i} has length {}", row.len())));
            }
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::param("transition", format!("row {i} has an entry outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::param("transition", format!("row {i} sums to {s}")));
            }
        }
        Ok(())
    }
}

/// `f_i = Ψ(φ_i + g_i(Z))` with `Z` a finite modulating chain and the
/// offsets clamped to `a′·ln(φ_1 + φ_2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiUrn {
    psi: GrowthFn,
    chain: ModulatorChain,
    offsets: [Vec<f64>; 2],
    cap_coefficient: f64,
}

impl PsiUrn {
    pub fn new(
        psi: GrowthFn,
        chain: ModulatorChain,
        offsets: [Vec<f64>; 2],
        cap_coefficient: f64,
    ) -> Result<Self> {
        psi.validate()?;
        chain.validate()?;
        if !(cap_coefficient > 0.0 && cap_coefficient < 0.5) {
            return Err(Error::param(
                "cap_coefficient",
                format!("must lie in (0, 1/2), got {cap_coefficient}"),
            ));
        }
        for (name, g) in [("g_white", &offsets[0]), ("g_red", &offsets[1])] {
            if g.len() != chain.states() {
                return Err(Error::param(name, format!("need one offset per chain state ({})", chain.states())));
            }
            if g.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
                return Err(Error::param(name, "offsets must be finite and ≥ 0"));
            }
        }
        Ok(Self {
            psi,
            chain,
            offsets,
            cap_coefficient,
        })
    }

    fn chain_state(state: &UrnState) -> usize {
        match state.provider_state {
            ProviderState::Modulator(z) => z,
            _ => unreachable!("psi urn always carries a modulator state"),
        }
    }
}

impl ReinforcementProvider for PsiUrn {
    fn name(&self) -> &'static str {
        "psi"
    }

    fn floor(&self) -> f64 {
        self.psi.value(1.0)
    }

    fn initial_state(&self) -> ProviderState {
        ProviderState::Modulator(self.chain.initial)
    }

    fn next_weights(&self, state: &UrnState) -> Weights {
        let z = Self::chain_state(state);
        let cap = self.cap_coefficient * (state.total() as f64).ln();
        let mut capped = false;
        let mut ln = [0.0; 2];
        for i in 0..2 {
            let g = self.offsets[i][z];
            let g = if g > cap {
                capped = true;
                cap
            } else {
                g
            };
            ln[i] = self.psi.ln_value(state.composition[i] as f64 + g);
        }
        Weights { ln, capped }
    }

    fn transitions(&self, state: &UrnState, _: Color) -> Vec<(ProviderState, f64)> {
        let z = Self::chain_state(state);
        self.chain.transition[z]
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(next, &p)| (ProviderState::Modulator(next), p))
            .collect()
    }

    fn advance(&self, state: &UrnState, _: Color, rng: &mut dyn RngCore) -> ProviderState {
        let z = Self::chain_state(state);
        if self.chain.states() == 1 {
            return ProviderState::Modulator(0);
        }
        let row = &self.chain.transition[z];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = z;
        for (next, &p) in row.iter().enumerate() {
            if p > 0.0 {
                last = next;
                acc += p;
                if u < acc {
                    return ProviderState::Modulator(next);
                }
            }
        }
        ProviderState::Modulator(last)
    }

    fn pick_floor(&self, color: Color) -> Option<(GrowthFn, f64)> {
        let min = self.offsets[color.index()]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        Some((self.psi, min))
    }
}

/// `f_i = (φ_i + λ·L_i)^α` with `L_i` the longest run of consecutive
/// i-draws so far.
#[derive(Debug, Clone, PartialEq)]
pub struct LongestRunUrn {
    alpha: f64,
    lambda: f64,
}

impl LongestRunUrn {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", "must be > 0"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::param("lambda", "must be ≥ 0"));
        }
        Ok(Self { alpha, lambda })
    }

    fn runs(state: &UrnState) -> RunTracker {
        match state.provider_state {
            ProviderState::Runs(r) => r,
            _ => unreachable!("longest-run urn always carries run state"),
        }
    }
}

impl ReinforcementProvider for LongestRunUrn {
    fn name(&self) -> &'static str {
        "longest_run"
    }

    fn floor(&self) -> f64 {
        1.0
    }

    fn initial_state(&self) -> ProviderState {
        ProviderState::Runs(RunTracker::default())
    }

    fn next_weights(&self, state: &UrnState) -> Weights {
        let r = Self::runs(state);
        let w = |i: usize| {
            self.alpha * (state.composition[i] as f64 + self.lambda * r.longest[i] as f64).ln()
        };
        Weights {
            ln: [w(0), w(1)],
            capped: false,
        }
    }

    fn transitions(&self, state: &UrnState, drawn: Color) -> Vec<(ProviderState, f64)> {
        let mut r = Self::runs(state);
        r.push(drawn);
        vec![(ProviderState::Runs(r), 1.0)]
    }

    fn advance(&self, state: &UrnState, drawn: Color, _: &mut dyn RngCore) -> ProviderState {
        let mut r = Self::runs(state);
        r.push(drawn);
        ProviderState::Runs(r)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionParams {
    g: Option<GrowthFn>,
    g_white: Option<GrowthFn>,
    g_red: Option<GrowthFn>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PsiParams {
    psi: GrowthFn,
    #[serde(default)]
    modulator: Option<ModulatorChain>,
    #[serde(default)]
    g_white: Option<Vec<f64>>,
    #[serde(default)]
    g_red: Option<Vec<f64>>,
    #[serde(default = "default_cap")]
    cap_coefficient: f64,
}

fn default_cap() -> f64 {
    0.4
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LongestRunParams {
    alpha: f64,
    #[serde(default = "one")]
    lambda: f64,
}

fn one() -> f64 {
    1.0
}

fn build_function(p: &Params) -> Result<Arc<dyn ReinforcementProvider>> {
    let p: FunctionParams = parse_params("function", p)?;
    let (w, r) = match (p.g, p.g_white, p.g_red) {
        (Some(g), None, None) => (g, g),
        (None, Some(w), Some(r)) => (w, r),
        _ => {
            return Err(Error::param(
                "function",
                "give either `g` or both `g_white` and `g_red`",
            ))
        }
    };
    Ok(Arc::new(FunctionUrn::new(w, r)?))
}

fn build_psi(p: &Params) -> Result<Arc<dyn ReinforcementProvider>> {
    let p: PsiParams = parse_params("psi", p)?;
    let chain = p.modulator.unwrap_or_else(ModulatorChain::constant);
    let n = chain.states();
    let offsets = [
        p.g_white.unwrap_or_else(|| vec![0.0; n]),
        p.g_red.unwrap_or_else(|| vec![0.0; n]),
    ];
    Ok(Arc::new(PsiUrn::new(p.psi, chain, offsets, p.cap_coefficient)?))
}

fn build_longest_run(p: &Params) -> Result<Arc<dyn ReinforcementProvider>> {
    let p: LongestRunParams = parse_params("longest_run", p)?;
    Ok(Arc::new(LongestRunUrn::new(p.alpha, p.lambda)?))
}

pub fn registry() -> &'static Registry<dyn ReinforcementProvider> {
    static REGISTRY: OnceLock<Registry<dyn ReinforcementProvider>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut r: Registry<dyn ReinforcementProvider> = Registry::new("provider");
        r.register("function", "f_i = g_i(φ_i) (g | g_white, g_red)", build_function);
        r.register(
            "psi",
            "f_i = Ψ(φ_i + g_i(Z)) with a finite modulating chain Z (psi, modulator, g_white, g_red, cap_coefficient)",
            build_psi,
        );
        r.register(
            "longest_run",
            "f_i = (φ_i + λ·longest i-run)^α (alpha, lambda)",
            build_longest_run,
        );
        r
    })
}

pub fn build(spec: &StrategySpec) -> Result<Arc<dyn ReinforcementProvider>> {
    registry().build(spec)
}
