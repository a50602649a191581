//! Interacting reinforced random walks on polygons and two-colour
//! generalized urn processes, with exact small-instance oracles and
//! finite-horizon detectors for localization and monopoly.
//!
//! Interaction kernels ([`kernels`]) and urn reinforcement providers
//! ([`urn`]) are strategies behind traits, registered by name and selected
//! from experiment configs.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod growth;
pub mod kernels;
pub mod registry;
pub mod rng;
pub mod urn;
pub mod walker;

pub use error::{Error, Result};
pub use graph::PolygonGraph;
pub use growth::{GrowthFn, Shift, TailSum};
pub use kernels::{InteractionKernel, KernelState};
pub use registry::{Registry, StrategySpec};
pub use rng::RngStream;
pub use urn::{Color, ReinforcementProvider, UrnRun, UrnState};
pub use walker::{SystemState, Trajectory, WalkConfig, WalkModel};
