use thiserror::Error;

/// Errors shared across all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input (length mismatch, non-invertible matrix, ...).
    #[error("input error: {0}")]
    Input(String),
    /// The requested computation exceeds the exhaustive/dense limits.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A parameter lies outside the validity domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
