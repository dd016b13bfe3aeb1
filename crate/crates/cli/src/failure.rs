use std::process::ExitCode;

use ctherm::io::LoadError;
use thiserror::Error;

/// Failure classes and their exit codes.
#[derive(Debug, Error)]
pub enum Failure {
    /// Bad flags or argument combinations (exit 1).
    #[error("{0}")]
    Usage(String),
    /// Input files or values rejected by validation (exit 2).
    #[error("{0}")]
    Input(String),
    /// A checked identity exceeded its tolerance (exit 3).
    #[error("{0}")]
    Consistency(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Consistency(_) => 3,
        })
    }
}

impl From<ctherm::Error> for Failure {
    fn from(e: ctherm::Error) -> Self {
        match e {
            ctherm::Error::Consistency { .. } => Failure::Consistency(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::Input(e.to_string())
    }
}
