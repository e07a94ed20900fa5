//! Library side of the `subexp` command: config parsing and suite runs.

pub mod config;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, Format, SuiteConfig};
pub use run::{run, write_artifacts, RunOutput, Summary};
