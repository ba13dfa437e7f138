//! Experiment harness for the `mlea` toolkit: JSON configs, deterministic
//! runs, CSV traces and the check suites behind the `mlea` binary.

pub mod checks;
pub mod config;
pub mod run;
pub mod table;

pub use config::{ConfigError, ExperimentConfig};
pub use run::{run, RunOutput, RunSummary};
pub use table::{table, TableRow};
