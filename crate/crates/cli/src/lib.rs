//! Experiment harness for the heatsym solver suite: configuration files,
//! run orchestration, error metrics, and CSV/SVG output.

// `!(x > 0)` guards must also reject NaN, which config files can contain
// ("nan" parses as a valid f64).
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csv_io;
pub mod runner;
pub mod svg;

pub use config::{ConfigError, ExperimentConfig};
pub use runner::{compare, run, ComparisonReport, HarnessError, RunReport};

/// Environment variable that overrides the `output.dir` of a config and the
/// `--output` directory of `compare`.
pub const OUTPUT_DIR_ENV: &str = "HEATSYM_OUT_DIR";
