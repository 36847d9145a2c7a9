//! Monte Carlo studies driven by a TOML configuration.

pub mod config;
pub mod manifest;
pub mod stats;
pub mod studies;

pub use config::ExperimentConfig;
pub use manifest::{rerun, run_study, RunManifest, StudyKind, StudyOutput};
