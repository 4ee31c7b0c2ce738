use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// An enabled check of the experiment failed.
    pub const ASSERTION: i32 = 1;
    /// Unparseable config or flags, or input rejected by a library precondition.
    pub const INVALID_INPUT: i32 = 2;
    /// A file could not be read or written.
    pub const IO: i32 = 3;
    /// A symbol produced a non-finite value.
    pub const EVALUATION: i32 = 4;
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] psido_core::Error),

    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("check failed: {0}")]
    Assertion(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        LabError::Invalid(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Invalid(_) => exit::INVALID_INPUT,
            LabError::Core(psido_core::Error::InvalidInput(_) | psido_core::Error::Precondition(_)) => {
                exit::INVALID_INPUT
            }
            LabError::Core(psido_core::Error::Evaluation { .. }) => exit::EVALUATION,
            LabError::Core(psido_core::Error::Infeasible { .. }) => exit::ASSERTION,
            LabError::Io { .. } => exit::IO,
            LabError::Assertion(_) => exit::ASSERTION,
        }
    }
}
