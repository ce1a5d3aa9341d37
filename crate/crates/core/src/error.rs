use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("point at distance {0:.3} exceeds the validity envelope")]
    Envelope(f64),
    #[error("simplex has no lift data at a required vertex")]
    LiftMissing,
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("unsupported genus {0}")]
    UnsupportedGenus(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
