//! Seeded reduction experiments over the oracles of `orc-core`: configs,
//! the trial runner, result files and scaling fits.

pub mod chains;
pub mod config;
pub mod fit;
pub mod output;
pub mod runner;

pub use chains::{Chain, Outcome, TrialRecord};
pub use config::{ConfigError, ExperimentConfig};
pub use runner::{run_experiment, RunOptions};
