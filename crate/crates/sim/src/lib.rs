//! Scenario runner for `opo-core`: JSON configuration, command-line parsing
//! and deterministic CSV, JSON and PGM output.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;

pub use config::{Mode, ScenarioConfig, Units};
pub use error::{SimError, SimResult, EXIT_CONFIG, EXIT_NUMERICAL};
pub use scenarios::{run, Report};
