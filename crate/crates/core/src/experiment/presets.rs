//! Built-in experiment configurations.

use serde::Serialize;
use serde_json::json;

use super::{ExperimentConfig, Kind, OutputSpec, UrnConfig};
use crate::error::{Error, Result};
use crate::registry::StrategySpec;
use crate::urn::Sampler;
use crate::walker::{InitialWeights, WalkConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
}

fn walk(walk: WalkConfig, replicas: u64, horizon: u64, checkpoints: Vec<u64>, window: u64) -> ExperimentConfig {
    ExperimentConfig {
        kind: Kind::Walk,
        replicas,
        horizon,
        checkpoints,
        windows: vec![window],
        base_seed: 1,
        export_trajectory: false,
        output: OutputSpec::default(),
        walk: Some(walk),
        urn: None,
        verify: None,
    }
}

fn urn(provider: StrategySpec, sampler: Sampler) -> ExperimentConfig {
    ExperimentConfig {
        kind: Kind::Urn,
        replicas: 1_000,
        horizon: 10_000,
        checkpoints: vec![],
        windows: vec![5_000],
        base_seed: 1,
        export_trajectory: false,
        output: OutputSpec::default(),
        walk: None,
        urn: Some(UrnConfig {
            start: [1, 1],
            sampler,
            provider,
        }),
        verify: None,
    }
}

fn power(alpha: f64) -> serde_json::Value {
    json!({ "family": "power", "alpha": alpha })
}

pub fn presets() -> Vec<Preset> {
    vec![
        Preset {
            name: "triangle-two-particles",
            description: "Two particles on a triangle, both starting at vertex 0, α = 2, \
                          exponentially discounted interaction with β = 1. Localization \
                          table at horizons 10³, 10⁴, 10⁵ with a 10³-move window.",
            config: walk(
                WalkConfig {
                    vertices: 3,
                    particles: 2,
                    alpha: 2.0,
                    initial_positions: vec![0, 0],
                    initial_weights: InitialWeights::Uniform(1),
                    kernel: StrategySpec::new("exp_discount").with("beta", 1.0),
                },
                500,
                100_000,
                vec![1_000, 10_000],
                1_000,
            ),
        },
        Preset {
            name: "polygon-k-walkers",
            description: "Three particles on a hexagon started at vertices 0, 2, 4, α = 2, \
                          interacting through the recency kernel.",
            config: walk(
                WalkConfig {
                    vertices: 6,
                    particles: 3,
                    alpha: 2.0,
                    initial_positions: vec![0, 2, 4],
                    initial_weights: InitialWeights::Uniform(1),
                    kernel: StrategySpec::new("recency"),
                },
                200,
                10_000,
                vec![1_000],
                1_000,
            ),
        },
        Preset {
            name: "polya-linear",
            description: "Classical Pólya urn, g(x) = x, start (1, 1). Both colours are drawn \
                          infinitely often, so monochromatic tails should be rare.",
            config: urn(StrategySpec::new("function").with("g", power(1.0)), Sampler::Direct),
        },
        Preset {
            name: "rubin-square",
            description: "Urn with g(x) = x² sampled by the exponential race. One colour is \
                          drawn only finitely often.",
            config: urn(StrategySpec::new("function").with("g", power(2.0)), Sampler::Race),
        },
        Preset {
            name: "psi-modulated",
            description: "Urn with f_i = Ψ(φ_i + g_i(Z)), Ψ(x) = x², driven by a two-state \
                          Markov modulator Z; offsets capped at 0.4·ln(total balls).",
            config: urn(
                StrategySpec::new("psi")
                    .with("psi", power(2.0))
                    .with(
                        "modulator",
                        json!({ "transition": [[0.9, 0.1], [0.5, 0.5]], "initial": 0 }),
                    )
                    .with("g_white", [0.0, 3.0])
                    .with("g_red", [1.0, 0.0])
                    .with("cap_coefficient", 0.4),
                Sampler::Direct,
            ),
        },
        Preset {
            name: "longest-run",
            description: "Urn whose weights reward each colour's longest run so far: \
                          f_i = (φ_i + L_i)², a path-dependent non-Markov reinforcement.",
            config: urn(
                StrategySpec::new("longest_run").with("alpha", 2.0).with("lambda", 1.0),
                Sampler::Direct,
            ),
        },
    ]
}

pub fn preset(name: &str) -> Result<Preset> {
    let all = presets();
    let known: Vec<String> = all.iter().map(|p| p.name.to_owned()).collect();
    all.into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownStrategy {
            kind: "preset",
            name: name.into(),
            known: known.join(", "),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Experiment;

    #[test]
    fn catalog() {
        let all = presets();
        assert!(all.len() >= 6);
        let mut names: Vec<_> = all.iter().map(|p| p.name).collect();
        names.dedup();
        assert_eq!(names.len(), all.len());
        assert!(preset("nope").unwrap_err().to_string().contains("triangle-two-particles"));
    }

    #[test]
    fn presets_validate_and_round_trip() {
        for p in presets() {
            p.config.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            let text = p.config.to_toml().unwrap();
            let back = ExperimentConfig::from_toml(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", p.name));
            assert_eq!(back, p.config, "{}", p.name);
        }
    }

    #[test]
    fn parameters_match_descriptions() {
        let t = preset("triangle-two-particles").unwrap().config;
        let w = t.walk.as_ref().unwrap();
        assert_eq!((w.vertices, w.particles, w.alpha), (3, 2, 2.0));
        assert_eq!(w.kernel, StrategySpec::new("exp_discount").with("beta", 1.0));
        assert_eq!(t.horizons(), vec![1_000, 10_000, 100_000]);
        assert_eq!(t.windows, vec![1_000]);

        let k = preset("polygon-k-walkers").unwrap().config;
        let w = k.walk.as_ref().unwrap();
        assert_eq!((w.vertices, w.particles), (6, 3));
        assert_eq!(w.initial_positions, vec![0, 2, 4]);

        for (name, alpha, sampler) in [("polya-linear", 1.0, Sampler::Direct), ("rubin-square", 2.0, Sampler::Race)] {
            let u = preset(name).unwrap().config.urn.unwrap();
            assert_eq!(u.provider.params["g"]["alpha"], alpha);
            assert_eq!(u.sampler, sampler);
            assert_eq!(u.start, [1, 1]);
        }

        let psi = preset("psi-modulated").unwrap().config;
        assert!(matches!(psi.experiment().unwrap(), Some(Experiment::Urn { .. })));
        assert_eq!(psi.urn.unwrap().provider.params["cap_coefficient"], 0.4);
        let lr = preset("longest-run").unwrap().config.urn.unwrap();
        assert_eq!(lr.provider.name, "longest_run");
    }
}
