use thiserror::Error;

/// Errors surfaced by geometry, arrangement, network and verifier operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A functional whose gradient is numerically zero cannot define a hyperplane.
    #[error("zero functional: |w| below tolerance")]
    ZeroFunctional,

    #[error("LP iteration limit exceeded after {iterations} pivots")]
    IterationLimit { iterations: usize },

    /// Empty or lower-dimensional input where full-dimensional data is required.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    /// A condition the algorithms guarantee was observed to fail; indicates a bug
    /// or numerically hostile data, never a property of well-formed inputs.
    #[error("internal invariant violation: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
