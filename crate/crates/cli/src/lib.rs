//! Configuration-driven experiments for taxed risk processes: batches of
//! simulated paths, estimates, large-`u` predictions and the reports that
//! compare them.

pub mod config;
pub mod experiment;
pub mod records;
pub mod report;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig};
pub use experiment::{run_experiment, RunOutput};
pub use report::Report;
pub use runner::Runner;
pub use taxrisk_core as core;
