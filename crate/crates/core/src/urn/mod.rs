//! Two-colour generalized urn processes.
//!
//! One ball is added per step. Colour i is drawn with probability
//! `f_i / (f_1 + f_2)`, where the weights come from a
//! [`ReinforcementProvider`] that sees the current composition and its own
//! modulator state, never the upcoming draw.

mod providers;

use std::io::Write;

use rand::{Rng, RngCore};
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{Shift, TailSum};

pub use providers::{
    build, registry, FunctionUrn, LongestRunUrn, ModulatorChain, PsiUrn,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    White,
    Red,
}

impl Color {
    pub const ALL: [Color; 2] = [Color::White, Color::Red];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Color::White => 0,
            Color::Red => 1,
        }
    }

    pub fn other(self) -> Color {
        match self {
            Color::White => Color::Red,
            Color::Red => Color::White,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Color::White => "white",
            Color::Red => "red",
        }
    }
}

/// Running record of consecutive same-colour draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunTracker {
    pub current: Option<Color>,
    pub length: u64,
    pub longest: [u64; 2],
}

impl RunTracker {
    pub fn push(&mut self, c: Color) {
        if self.current == Some(c) {
            self.length += 1;
        } else {
            self.current = Some(c);
            self.length = 1;
        }
        let best = &mut self.longest[c.index()];
        *best = (*best).max(self.length);
    }

    pub fn from_log(log: &[Color]) -> Self {
        let mut r = Self::default();
        log.iter().for_each(|&c| r.push(c));
        r
    }
}

/// Provider-owned part of the urn's Markov state.
#[derive(Debug, Clone, PartialEq)]
pub enum ProviderState {
    Stateless,
    /// Current state of a finite modulating chain.
    Modulator(usize),
    Runs(RunTracker),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrnState {
    pub composition: [u64; 2],
    pub step: u64,
    pub draw_log: Vec<Color>,
    pub provider_state: ProviderState,
}

impl UrnState {
    pub fn new(start: [u64; 2], provider: &dyn ReinforcementProvider) -> Result<Self> {
        if start.contains(&0) {
            return Err(Error::param("start", "both colours need at least one ball"));
        }
        Ok(Self {
            composition: start,
            step: 0,
            draw_log: Vec::new(),
            provider_state: provider.initial_state(),
        })
    }

    pub fn total(&self) -> u64 {
        self.composition[0] + self.composition[1]
    }
}

/// Weights `(f_1, f_2)` for the next draw, stored as logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub ln: [f64; 2],
    /// The provider had to clamp a modulator offset.
    pub capped: bool,
}

impl Weights {
    pub fn from_values(f_white: f64, f_red: f64) -> Self {
        Self {
            ln: [f_white.ln(), f_red.ln()],
            capped: false,
        }
    }

    #[inline]
    pub fn white_probability(&self) -> f64 {
        1.0 / (1.0 + (self.ln[1] - self.ln[0]).exp())
    }

    pub fn value(&self, c: Color) -> f64 {
        self.ln[c.index()].exp()
    }
}

pub trait ReinforcementProvider: std::fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Declared lower bound ε on every weight the provider can return.
    fn floor(&self) -> f64;

    fn initial_state(&self) -> ProviderState;

    /// Weights for the draw taking the urn from step k to k + 1.
    fn next_weights(&self, state: &UrnState) -> Weights;

    /// Law of the next provider state given the pre-draw state and the colour
    /// just drawn. Probabilities sum to one.
    fn transitions(&self, state: &UrnState, drawn: Color) -> Vec<(ProviderState, f64)>;

    /// Sample from [`Self::transitions`]. Deterministic providers must not
    /// consume randomness.
    fn advance(&self, state: &UrnState, drawn: Color, rng: &mut dyn RngCore) -> ProviderState;

    /// For families with a closed-form pick floor: `(Ψ, c)` such that the
    /// k-th pick of `color` has weight at least `Ψ(φ_color(0) + k + c)`.
    fn pick_floor(&self, _color: Color) -> Option<(crate::growth::GrowthFn, f64)> {
        None
    }
}

/// One recorded draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub color: Color,
    pub weights: Weights,
}

fn checked_weights(state: &UrnState, provider: &dyn ReinforcementProvider) -> Result<Weights> {
    let w = provider.next_weights(state);
    let floor = provider.floor();
    let ln_floor = floor.ln();
    for &l in &w.ln {
        // relative slack for rounding in log space
        if l.is_nan() || l < ln_floor - 1e-9 * ln_floor.abs().max(1.0) {
            return Err(Error::ContractViolation {
                provider: provider.name().to_owned(),
                weight: l.exp(),
                floor,
            });
        }
    }
    Ok(w)
}

fn commit<R: RngCore>(
    state: &mut UrnState,
    provider: &dyn ReinforcementProvider,
    color: Color,
    rng: &mut R,
) {
    let next = provider.advance(state, color, rng);
    state.provider_state = next;
    state.composition[color.index()] += 1;
    state.step += 1;
    state.draw_log.push(color);
}

/// Draw directly: white iff a uniform falls below `f_1 / (f_1 + f_2)`.
pub fn gup_step<R: RngCore>(
    state: &mut UrnState,
    provider: &dyn ReinforcementProvider,
    rng: &mut R,
) -> Result<Draw> {
    let weights = checked_weights(state, provider)?;
    let u: f64 = rng.random();
    let color = if u < weights.white_probability() {
        Color::White
    } else {
        Color::Red
    };
    commit(state, provider, color, rng);
    Ok(Draw { color, weights })
}

/// Draw by exponential race: colour i rings at `E_i / f_i` with independent
/// standard exponentials `E_i`; the first to ring is drawn.
pub fn race_step<R: RngCore>(
    state: &mut UrnState,
    provider: &dyn ReinforcementProvider,
    rng: &mut R,
) -> Result<Draw> {
    let weights = checked_weights(state, provider)?;
    let e_white: f64 = rng.sample(Exp1);
    let e_red: f64 = rng.sample(Exp1);
    let color = if e_white.ln() - weights.ln[0] <= e_red.ln() - weights.ln[1] {
        Color::White
    } else {
        Color::Red
    };
    commit(state, provider, color, rng);
    Ok(Draw { color, weights })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    #[default]
    Direct,
    Race,
}

#[derive(Debug, Clone)]
pub struct UrnRun {
    pub start: [u64; 2],
    pub draws: Vec<Color>,
    /// Composition after each step, `compositions[0] == start`.
    pub compositions: Vec<[u64; 2]>,
    /// Log-weights used at each draw.
    pub ln_weights: Vec<[f64; 2]>,
    pub capped_steps: u64,
    pub final_state: UrnState,
}

impl UrnRun {
    pub fn horizon(&self) -> u64 {
        self.draws.len() as u64
    }

    /// Pre-draw step indices k at which `color` was drawn, i.e. the k with
    /// `φ_color(k + 1) > φ_color(k)`.
    pub fn pick_times(&self, color: Color) -> Vec<u64> {
        self.draws
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == color)
            .map(|(k, _)| k as u64)
            .collect()
    }

    pub fn last_pick(&self, color: Color) -> Option<u64> {
        self.draws.iter().rposition(|&c| c == color).map(|k| k as u64)
    }

    /// `Σ 1/f_i²` over the picks of colour i.
    pub fn squared_weight_tail(&self, color: Color) -> f64 {
        let i = color.index();
        self.draws
            .iter()
            .zip(&self.ln_weights)
            .filter(|(&c, _)| c == color)
            .map(|(_, w)| (-2.0 * w[i]).exp())
            .sum()
    }

    /// Smallest weight carried by a drawn colour at its pick.
    pub fn min_pick_weight(&self) -> Option<f64> {
        self.draws
            .iter()
            .zip(&self.ln_weights)
            .map(|(&c, w)| w[c.index()])
            .min_by(f64::total_cmp)
            .map(f64::exp)
    }

    /// Rows `step,color,f_1,f_2,phi_1,phi_2`: draw number, colour drawn, the
    /// weights it was drawn with, and the composition after it.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,color,f_1,f_2,phi_1,phi_2")?;
        for (k, (c, w)) in self.draws.iter().zip(&self.ln_weights).enumerate() {
            let phi = self.compositions[k + 1];
            writeln!(
                out,
                "{},{},{},{},{},{}",
                k + 1,
                c.as_str(),
                w[0].exp(),
                w[1].exp(),
                phi[0],
                phi[1]
            )?;
        }
        Ok(())
    }
}

pub fn run_urn<R: RngCore>(
    provider: &dyn ReinforcementProvider,
    start: [u64; 2],
    horizon: u64,
    sampler: Sampler,
    rng: &mut R,
) -> Result<UrnRun> {
    let mut state = UrnState::new(start, provider)?;
    state.draw_log.reserve(horizon as usize);
    let mut compositions = Vec::with_capacity(horizon as usize + 1);
    let mut ln_weights = Vec::with_capacity(horizon as usize);
    compositions.push(start);
    let mut capped_steps = 0;
    for _ in 0..horizon {
        let d = match sampler {
            Sampler::Direct => gup_step(&mut state, provider, rng)?,
            Sampler::Race => race_step(&mut state, provider, rng)?,
        };
        capped_steps += d.weights.capped as u64;
        ln_weights.push(d.weights.ln);
        compositions.push(state.composition);
    }
    if capped_steps > 0 {
        tracing::warn!(
            provider = provider.name(),
            capped_steps,
            "modulator offset clamped to its logarithmic cap"
        );
    }
    Ok(UrnRun {
        start,
        draws: state.draw_log.clone(),
        compositions,
        ln_weights,
        capped_steps,
        final_state: state,
    })
}

/// Exact law of the first `horizon` draws, by enumerating every colour
/// sequence and every provider transition. Index bit t is set when draw
/// t + 1 is white.
pub fn exact_sequence_law(
    provider: &dyn ReinforcementProvider,
    start: [u64; 2],
    horizon: u32,
) -> Result<Vec<f64>> {
    if horizon > 24 {
        return Err(Error::param("horizon", "exact enumeration limited to 24 draws"));
    }
    let mut law = vec![0.0; 1usize << horizon];
    let root = UrnState::new(start, provider)?;
    let mut stack = vec![(root, 1.0f64, 0usize)];
    while let Some((state, mass, bits)) = stack.pop() {
        let t = state.step as u32;
        if t == horizon {
            law[bits] += mass;
            continue;
        }
        let w = checked_weights(&state, provider)?;
        let p = w.white_probability();
        for (color, pc) in [(Color::White, p), (Color::Red, 1.0 - p)] {
            if pc == 0.0 {
                continue;
            }
            let bits = bits | ((color == Color::White) as usize) << t;
            for (next, pz) in provider.transitions(&state, color) {
                let mut child = state.clone();
                child.provider_state = next;
                child.composition[color.index()] += 1;
                child.step += 1;
                child.draw_log.push(color);
                stack.push((child, mass * pc * pz, bits));
            }
        }
    }
    Ok(law)
}

/// `Σ_{t ≥ from} 1/values[t]`; zero over an empty range.
pub fn tail_sum(values: &[f64], from: usize) -> Result<f64> {
    let mut sum = 0.0;
    for (i, &v) in values.iter().enumerate().skip(from) {
        if !(v > 0.0) {
            return Err(Error::NonPositive { index: i, value: v });
        }
        sum += 1.0 / v;
    }
    Ok(sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionIReport {
    /// `⟨B_i⟩` per colour; `None` when the series diverges.
    pub white: Option<TailSum>,
    pub red: Option<TailSum>,
    pub holds: bool,
}

/// Reciprocal sum of the essential-infimum weights at successive picks of
/// each colour. Only providers with a closed-form pick floor are supported.
pub fn assumption_i_diagnostic(
    provider: &dyn ReinforcementProvider,
    start: [u64; 2],
) -> Result<AssumptionIReport> {
    let mut out = [None, None];
    for c in Color::ALL {
        let (psi, shift) = provider
            .pick_floor(c)
            .ok_or_else(|| Error::UnsupportedProvider(provider.name().to_owned()))?;
        let from = start[c.index()] + 1;
        out[c.index()] = match psi.reciprocal_tail(from, 1.0, Shift::Constant(shift)) {
            Ok(t) => Some(t),
            Err(Error::Divergent(_)) => None,
            Err(e) => return Err(e),
        };
    }
    let [white, red] = out;
    let holds = white.is_some() || red.is_some();
    Ok(AssumptionIReport { white, red, holds })
}
