use thiserror::Error;

use crate::distributions::Class;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The acceptance probability of a feature underflowed, so its truncated density
    /// cannot be normalized.
    #[error("degenerate truncation: feature {feature} of the {class} class has acceptance probability {acceptance:e}")]
    DegenerateTruncation {
        feature: usize,
        class: Class,
        acceptance: f64,
    },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
