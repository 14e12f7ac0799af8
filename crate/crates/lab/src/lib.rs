//! Experiment runner for the `kdv5` spectral laboratory: TOML configuration,
//! CSV and JSON artifacts, one task per subcommand and the acceptance suite.

pub mod config;
pub mod experiments;
pub mod output;
pub mod report;
pub mod suite;
pub mod tasks;

pub use config::ExperimentConfig;
pub use report::{Invariant, Report};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] kdv5::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// Process exit code: 2 for configuration problems, 3 for numerical
    /// blow-up and 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Core(kdv5::Error::InvalidConfig(_) | kdv5::Error::InvalidParams(_)) => 2,
            LabError::Core(kdv5::Error::BlowUp { .. }) => 3,
            _ => 1,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
