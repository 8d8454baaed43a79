use thiserror::Error;

/// Errors raised by the auction library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-contract input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operation was invoked on an instance whose environment it does not handle.
    #[error("environment mismatch: {operation} requires {expected}, instance is {found}")]
    EnvironmentMismatch {
        operation: &'static str,
        expected: &'static str,
        found: &'static str,
    },

    /// Exact solvers refuse instances above their size limit.
    #[error("refused: {what} is {actual}, limit is {limit}")]
    LimitExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    /// A packing produced a channel set for which no valid power assignment was found.
    #[error("power assignment failed on channel {channel} for a packed set of {size} links")]
    PowerSolveFailed { channel: usize, size: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by the caller's input rather than an internal failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::EnvironmentMismatch { .. }
                | Error::LimitExceeded { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
