use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("cannot parse config {path}: {source}")]
    ParseConfig { path: PathBuf, source: toml::de::Error },

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {target}: {source}")]
    Write { target: String, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] catsize::Error),

    #[error("{failed} of {total} oracle checks failed")]
    OracleFailure { failed: usize, total: usize },
}

impl CliError {
    /// 1 for bad parameters (including failed computations at the requested
    /// point), 2 for oracle failures, 3 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parameter(_) | CliError::ParseConfig { .. } | CliError::Core(_) => 1,
            CliError::OracleFailure { .. } => 2,
            CliError::Read { .. } | CliError::Write { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
