//! Batch driver for `knflow-core`: JSON experiment configs, curve and report
//! file formats, and the `knflow` command line.

pub mod config;
pub mod error;
pub mod io;
pub mod run;

pub use config::{Command, ExperimentConfig};
pub use error::{CliError, Result};
pub use run::{run, run_config, RunOutcome};
