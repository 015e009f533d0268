//! Experiment harness for the distortion-aware energy-efficiency allocator:
//! scenario generation, the experiment families behind the CLI subcommands,
//! and deterministic CSV/report emission.

// Validation guards are written as negated comparisons (`!(v > 0)`) so that
// NaN inputs fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod report;
pub mod scenario;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use experiment::{run_deep_deal, run_experiment, ExperimentOutput, ResultRow};
