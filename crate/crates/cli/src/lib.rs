//! Experiment driver: configuration parsing, seeded runs and CSV output.

pub mod audit;
pub mod config;
pub mod experiments;

pub use config::{parse_config, parse_config_str, Experiment, ExperimentConfig};
pub use experiments::{run, Report, Table};
