//! Experiment harness for batched RR-set reuse: static and dynamic runs,
//! update-batch generation, Monte Carlo evaluation and result tables.

use std::path::{Path, PathBuf};

pub mod config;
pub mod experiment;
pub mod output;
pub mod synthetic;

pub use config::{ExperimentConfig, WeightModel};
pub use experiment::{load_graph, run_dynamic, run_static, Algorithm, RunRecord};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("argument: {0}")]
    Argument(String),

    #[error(transparent)]
    Data(dimp_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code: 3 for I/O, 4 for bad configuration or arguments,
    /// 5 for malformed or inconsistent data.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Data(dimp_core::Error::Io(_)) => 3,
            CliError::Config(_)
            | CliError::Argument(_)
            | CliError::Data(dimp_core::Error::InvalidArgument(_)) => 4,
            CliError::Data(_) => 5,
        }
    }
}

impl From<dimp_core::Error> for CliError {
    fn from(e: dimp_core::Error) -> Self {
        CliError::Data(e)
    }
}
