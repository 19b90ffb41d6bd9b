use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point is not on the {geometry} manifold: {reason}")]
    Membership {
        geometry: &'static str,
        reason: String,
    },

    #[error("vector is not tangent on the {geometry} manifold: {reason}")]
    Tangency {
        geometry: &'static str,
        reason: String,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("data cloud is empty")]
    EmptyCloud,

    #[error("backtracking did not satisfy the sufficient decrease condition after {0} contractions")]
    BacktrackingExhausted(usize),

    #[error("invalid stepsize rule: {0}")]
    InvalidStepsize(String),
}

pub type Result<T> = std::result::Result<T, Error>;
