//! Experiment harness: configuration, parallel trial orchestration, result
//! bundles and spectrum plots.

pub mod config;
pub mod error;
pub mod plot;
pub mod run;

pub use config::{ExperimentConfig, Kind, Preset};
pub use error::LabError;
pub use run::run;
