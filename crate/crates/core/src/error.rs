use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("polytope is unbounded")]
    Unbounded,

    #[error("degenerate (lower-dimensional) polytope: {0}")]
    Degenerate(String),

    #[error("dimension {0} exceeds the supported maximum of {max}", max = crate::geometry::MAX_DIM)]
    DimensionTooLarge(usize),

    #[error("origin is not in the polytope")]
    OriginNotContained,

    #[error("weight is not positive: {0}")]
    NonPositiveWeight(String),

    #[error("not a compatible Kähler class: {0}")]
    NotCompatible(String),

    #[error("class is not Kähler: {0}")]
    NotKahler(String),

    #[error("exact arithmetic requested but {0} is only available approximately")]
    NotExact(String),

    #[error("quadrature did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}
