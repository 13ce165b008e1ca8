use thiserror::Error;

pub type Result<T, E = CoosError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CoosError {
    /// Input violates an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown {kind}: {id}")]
    NotFound { kind: &'static str, id: String },

    #[error("illegal transition from {from} to {to}")]
    IllegalTransition { from: String, to: String },

    #[error("forbidden: {0}")]
    Forbidden(String),

    #[error("conflict: {0}")]
    Conflict(String),

    /// No sign change of the bracketed function.
    #[error("bracketing error: {0}")]
    Bracketing(String),

    #[error("sweep of {size} scenarios exceeds cap {cap}")]
    SweepTooLarge { size: u128, cap: u64 },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CoosError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CoosError::Domain(msg.into())
    }

    pub fn not_found(kind: &'static str, id: impl ToString) -> Self {
        CoosError::NotFound {
            kind,
            id: id.to_string(),
        }
    }
}
