//! Batch runner for the chaining experiments: JSON configs in, JSON reports and CSV tables out.

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod tables;

pub use config::{ExperimentConfig, Overrides};
pub use error::CliError;
pub use run::{run, Outcome};
