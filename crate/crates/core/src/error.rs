use thiserror::Error;

/// Errors raised by the capacity toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid probability vector: {0}")]
    InvalidPmf(String),

    #[error("invalid causal kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid channel specification: {0}")]
    InvalidChannel(String),

    #[error("state {state} is outside the output alphabet of size {alphabet}")]
    StateOutOfRange { state: usize, alphabet: usize },

    #[error("dense kernel would hold {entries} entries, above the cap of {cap}")]
    DenseCapExceeded { entries: usize, cap: usize },

    #[error("sequence kernel is singular: {0}")]
    SingularChannel(String),

    #[error("problem too large: {0}")]
    Infeasible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config parse error on line {line}: {message}")]
    Config { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
