//! Scenario-driven runner for the eigtrack simulator.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod suites;

pub use config::{parse_config, ConfigError, ScenarioConfig};
pub use suites::{run, Summary, SuiteError};
