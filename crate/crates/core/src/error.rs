use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid point set: {0}")]
    InvalidPoints(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("operation requires an integer-coordinate point set")]
    NotIntegerDomain,

    #[error("kernel {0} cannot be used for this product")]
    InapplicableKernel(&'static str),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error(
        "coordinate bound M = {bound} exceeds the guard {guard}; encoded entries need \
         about M*log2(m+1) bits each and memory would blow up (raise the guard to force)"
    )]
    BoundTooLarge { bound: u64, guard: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}
