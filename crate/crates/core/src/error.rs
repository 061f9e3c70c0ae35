use thiserror::Error;

#[derive(Debug, Error)]
pub enum SgeoError {
    #[error("operator is not Hermitian: max asymmetry {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("triple invariant violated: {0}")]
    InvariantViolation(String),

    #[error("truncation band exhausted: inner cutoff {inner} at depth {depth}")]
    BandExhausted { inner: i64, depth: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported for this geometry: {0}")]
    Unsupported(String),

    #[error("unknown element `{0}`")]
    UnknownElement(String),
}

pub type Result<T> = std::result::Result<T, SgeoError>;
