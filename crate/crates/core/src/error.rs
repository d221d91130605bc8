use num_bigint::BigInt;
use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("popularity must contain at least 2 probabilities, got {0}")]
    SizeTooSmall(usize),

    #[error("probability out of range (0, 1): p_{index} = {value}")]
    OutOfRange { index: usize, value: String },

    #[error("probabilities sum to {sum}, expected 1 (enable renormalization to rescale)")]
    NotNormalized { sum: String },

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("{0}")]
    Range(String),

    #[error("enumerating {count} subsets exceeds the guard limit {guard}")]
    EnumerationTooLarge { count: BigInt, guard: u64 },

    #[error("cannot parse {input:?} as a {backend} scalar: {reason}")]
    Parse {
        input: String,
        backend: &'static str,
        reason: String,
    },
}

impl Error {
    /// Stable machine-readable code, used by the CLI's JSON error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SizeTooSmall(_) => "SizeTooSmall",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::NotNormalized { .. } => "NotNormalized",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InvalidIndexSet(_) => "InvalidIndexSet",
            Error::Range(_) => "RangeError",
            Error::EnumerationTooLarge { .. } => "EnumerationTooLarge",
            Error::Parse { .. } => "ParseError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
