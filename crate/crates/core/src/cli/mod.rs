//! Command-line front end: JSON experiment configs in, reproducible reports out.

pub mod commands;
pub mod config;
pub mod report;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use commands::{
    cmd_discriminate, cmd_report_metrics, cmd_simulate, cmd_solve_pointer, run, Command,
};
pub use config::ExperimentConfig;
pub use report::{to_human, to_structured, Report};

use crate::error::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// 0 success, 1 config error, 2 no pointer solution, 3 metric undefined.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::NoSolution) => 2,
            CliError::Core(Error::NullMatrix) => 3,
            _ => 1,
        }
    }
}

/// Reads a config file, or the defaults when no path is given.
pub fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, CliError> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Read {
                path: p.to_path_buf(),
                source,
            })?;
            Ok(ExperimentConfig::from_json(&text)?)
        }
    }
}
