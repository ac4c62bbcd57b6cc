//! Experiment driver: configuration files, full- and reduced-order runs,
//! CSV and manifest output, and gnuplot scripts for the comparisons.

pub mod config;
pub mod pipeline;
pub mod plots;
pub mod report;
pub mod runner;

use thiserror::Error;

pub use config::{ConfigError, ExperimentConfig, Method};
pub use pipeline::{execute, Stage};
pub use runner::{Experiment, RunOutcome};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("solver failure: {0}")]
    Solver(#[from] ligep::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("manifest {path}: {reason}")]
    Manifest { path: String, reason: String },

    #[error("missing artifact {0}")]
    MissingArtifact(String),
}

impl BenchError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        BenchError::Io { path: path.display().to_string(), source }
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Solver(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
