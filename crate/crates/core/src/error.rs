//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by loss evaluation, training, and data handling.
#[derive(Debug, Error)]
pub enum Error {
    /// Input contained NaN/Inf or was empty where a value was required.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A hyper-parameter was outside its legal range.
    #[error("invalid config: {0}")]
    Config(String),

    /// A caller-side contract was violated (bad target index, empty batch, shape mismatch).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A computation produced a non-finite value.
    #[error("numeric failure at step {step:?}: {msg}")]
    Numeric { step: Option<u64>, msg: String },

    /// A statistic is undefined for the given series (e.g. Pearson on a constant series).
    #[error("undefined statistic: {0}")]
    Undefined(String),

    /// Failure while reading or writing a dataset file.
    #[error("load error at {path}:{line}: {msg}")]
    Load {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
