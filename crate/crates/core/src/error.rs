use thiserror::Error;

/// Errors raised by the correction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-domain input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The transport constraints admit no plan.
    #[error("infeasible transport problem: {0}")]
    Infeasible(String),

    /// A transport plan row carries no mass and cannot be mapped to an identity change.
    #[error("degenerate plan: {0}")]
    DegeneratePlan(String),

    /// Exhaustive search was asked to enumerate more assignments than allowed.
    #[error("instance too large for exhaustive search: {assignments} assignments exceed the limit of {limit}")]
    TooLarge { assignments: f64, limit: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
