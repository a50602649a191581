//! Detectors and numeric verifiers.

pub mod attraction;
pub mod localization;
pub mod psi_checks;
pub mod ruin;
pub mod stats;

pub use attraction::{
    estimate_attraction, AttractionReport, AttractionRow, Detection, Experiment, Probe,
    ReplicaOutcome, Run,
};
pub use localization::{
    detect_localization, detect_monochromatic_tail, localize_path, log_gap_crossings,
    log_gap_threshold, LocalizationReport, ParticleLocalization,
};
pub use psi_checks::{
    check_psi_growth_condition, check_tail_domination, liminf_ratio_profile, GrowthConditionReport,
    RatioProfile, TailDominationReport,
};
pub use ruin::{
    l_decomposition, laplace_moment_check, ruin_moments_chain_oracle, ruin_moments_closed_form,
    RuinMoments,
};
