use std::path::Path;

use thiserror::Error;

/// Failure of a subcommand, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<cmmsb::error::Error> for CliError {
    fn from(err: cmmsb::error::Error) -> Self {
        use cmmsb::error::Error;
        match err {
            Error::Config(msg) | Error::Domain(msg) => CliError::Config(msg),
            Error::Consistency(msg) => CliError::Numerical(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
