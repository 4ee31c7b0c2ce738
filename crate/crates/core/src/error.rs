use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A symbol produced a NaN or infinite value.
    #[error("symbol evaluation is not finite at x = {x:?}, xi = {xi:?}")]
    Evaluation { x: Vec<f64>, xi: Vec<f64> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("smoothness budget infeasible; binding constraints: {}", .binding.join("; "))]
    Infeasible { binding: Vec<String> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
