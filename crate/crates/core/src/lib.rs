//! Randomization inference: exact and asymptotically valid randomization
//! tests, conformal prediction, and approximate randomization tests for
//! clustered data, plus a simulation harness for calibrated level and
//! power studies on synthetic data.
//!
//! The numeric kernels are generic over a floating [`Scalar`]; the
//! aliases below fix the default `f64` instantiations.

pub mod cluster;
pub mod conformal;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod groups;
pub mod linalg;
pub mod sample;
pub mod scalar;
pub mod simlab;
pub mod stats;

pub use engine::{
    decide, run_exact, run_exact_cfg, run_mc, run_mc_cfg, Decision, EngineConfig, FnStatistic,
    Mode, RandomizationResult, Statistic, UndefinedPolicy,
};
pub use error::{Error, Result};
pub use groups::{apply, compose, GroupElement, GroupKind};
pub use sample::{ExperimentSample, Sample};
pub use scalar::Scalar;
pub use stats::StatisticSpec;

/// Default scalar used by the command-line front end.
pub type Real = f64;
/// Samples at the default precision.
pub type Sample64 = Sample<f64>;
/// Experiment samples at the default precision.
pub type ExperimentSample64 = ExperimentSample<f64>;
/// Engine results at the default precision.
pub type RandomizationResult64 = RandomizationResult<f64>;

/// Crate version recorded in emitted result artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
