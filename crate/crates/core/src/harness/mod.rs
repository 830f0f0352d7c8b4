//! Experiment configuration, end-to-end runs, sweeps and the named presets
//! that reproduce each acceptance criterion.

mod config;
mod presets;
mod run;
mod sweep;

pub use config::{Check, CheckOptions, ExperimentConfig, GammaSpec, LambdaMode, OutputPaths};
pub use presets::{preset, preset_names, run_preset, Preset, PresetOutcome};
pub use run::{
    run_experiment, run_experiment_with_host, AuditBundle, CheckOutcome, CheckStatus, RunReport, RunSummary,
    StageError,
};
pub use sweep::{sweep, write_csv, CsvRow, SweepGrid, SweepResult};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Stage { stage: String, message: String },
    #[error("io: {0}")]
    Io(String),
}

impl HarnessError {
    pub(crate) fn stage(stage: &str, e: impl std::fmt::Display) -> Self {
        HarnessError::Stage { stage: stage.into(), message: e.to_string() }
    }
}
