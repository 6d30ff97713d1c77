//! Experiment runner for the `gencost` library: configuration, the builtin
//! catalog, output files and certificate replay.

pub mod build;
pub mod catalog;
pub mod config;
pub mod error;
pub mod output;
pub mod replay;
pub mod runner;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use runner::{execute, run_experiment, RunOutcome, RunReport};
