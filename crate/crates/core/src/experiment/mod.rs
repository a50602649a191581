//! Experiment configuration files and the batch runner.
//!
//! A config is a TOML document. Unknown keys are rejected at every level.
//!
//! ```toml
//! kind = "walk"          # walk | urn | verify
//! replicas = 500
//! horizon = 10000
//! checkpoints = [1000]   # extra prefix horizons scored on the same runs
//! windows = [1000]
//! base_seed = 1
//!
//! [output]
//! path = "out"           # directory
//! format = "csv"         # csv | json
//!
//! [walk]
//! vertices = 3
//! particles = 2
//! alpha = 2.0
//! initial_positions = [0, 0]
//! kernel = { name = "exp_discount", beta = 1.0 }
//! ```
//!
//! Urn experiments replace `[walk]` with
//!
//! ```toml
//! [urn]
//! start = [1, 1]
//! sampler = "direct"     # direct | race
//! provider = { name = "function", g = { family = "power", alpha = 2.0 } }
//! ```
//!
//! and `kind = "verify"` takes an optional `[verify]` table overriding the
//! checker defaults in [`VerifyConfig`].

mod presets;
mod run;
mod verify;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::Experiment;
use crate::error::{Error, Result};
use crate::registry::StrategySpec;
use crate::urn::{self, Sampler};
use crate::walker::{WalkConfig, WalkModel};

pub use presets::{preset, presets, Preset};
pub use run::{run_experiment, Artifacts, AGGREGATE_COLUMNS, REPLICA_COLUMNS};
pub use verify::{run_verify, CheckResult, VerifyConfig, VerifyReport, CHECK_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Walk,
    Urn,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::param("format", format!("expected csv or json, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            path: PathBuf::from("out"),
            format: Format::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UrnConfig {
    #[serde(default = "unit_start")]
    pub start: [u64; 2],
    #[serde(default)]
    pub sampler: Sampler,
    pub provider: StrategySpec,
}

fn unit_start() -> [u64; 2] {
    [1, 1]
}

fn one() -> u64 {
    1
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default = "one")]
    pub replicas: u64,
    #[serde(default)]
    pub horizon: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<u64>,
    #[serde(default)]
    pub windows: Vec<u64>,
    #[serde(default)]
    pub base_seed: u64,
    /// Also write replica 0's trajectory or draw log.
    #[serde(default, skip_serializing_if = "is_false")]
    pub export_trajectory: bool,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<WalkConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub urn: Option<UrnConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Every horizon scored: checkpoints plus the final horizon.
    pub fn horizons(&self) -> Vec<u64> {
        let mut h = self.checkpoints.clone();
        h.push(self.horizon);
        h.sort_unstable();
        h.dedup();
        h
    }

    pub fn validate(&self) -> Result<()> {
        let sections = (self.walk.is_some(), self.urn.is_some());
        match self.kind {
            Kind::Walk if sections != (true, false) => {
                return Err(Error::param("walk", "kind = \"walk\" needs a [walk] table and no [urn]"))
            }
            Kind::Urn if sections != (false, true) => {
                return Err(Error::param("urn", "kind = \"urn\" needs an [urn] table and no [walk]"))
            }
            Kind::Verify => {
                if sections != (false, false) {
                    return Err(Error::param("kind", "verify takes no [walk] or [urn] table"));
                }
                return self.verify.clone().unwrap_or_default().validate();
            }
            _ => {}
        }
        if self.verify.is_some() {
            return Err(Error::param("verify", "only allowed with kind = \"verify\""));
        }
        if self.replicas == 0 {
            return Err(Error::param("replicas", "must be ≥ 1"));
        }
        if self.horizon == 0 {
            return Err(Error::param("horizon", "must be ≥ 1"));
        }
        if let Some(&c) = self.checkpoints.iter().find(|&&c| c == 0 || c > self.horizon) {
            return Err(Error::param(
                "checkpoints",
                format!("{c} outside 1..={}", self.horizon),
            ));
        }
        if self.windows.is_empty() {
            return Err(Error::param("windows", "need at least one window"));
        }
        if let Some(&w) = self.windows.iter().find(|&&w| w == 0 || w > self.horizon) {
            return Err(Error::param(
                "windows",
                format!("{w} outside 1..={} (window ≤ horizon)", self.horizon),
            ));
        }
        self.experiment().map(|_| ())
    }

    /// Builds the simulation model; `None` for verify configs.
    pub fn experiment(&self) -> Result<Option<Experiment>> {
        if let Some(w) = &self.walk {
            return Ok(Some(Experiment::Walk(Arc::new(WalkModel::new(w)?))));
        }
        if let Some(u) = &self.urn {
            return Ok(Some(Experiment::Urn {
                provider: urn::build(&u.provider)?,
                start: u.start,
                sampler: u.sampler,
            }));
        }
        Ok(None)
    }
}
