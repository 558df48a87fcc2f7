use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension d = {0}; at least 2 outcomes are required")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter vector has length {found}, expected {expected} for d = {d}")]
    ParameterLength { d: usize, expected: usize, found: usize },

    #[error("operator is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("operator is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("outcome index {index} out of range 1..={d}")]
    OutcomeOutOfRange { index: usize, d: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("squeezing parameter must be non-negative and finite, got {0}")]
    InvalidSqueezing(f64),

    #[error("truncation n_max = {n_max} is not a multiple of d = {d}")]
    TruncationNotBlockComplete { n_max: usize, d: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("brute-force enumeration refused for d = {d} (limit {limit})")]
    EnumerationTooLarge { d: usize, limit: usize },

    #[error("invalid Bell specification: {0}")]
    InvalidSpec(String),

    #[error("invalid settings: {0}")]
    InvalidSettings(String),
}
