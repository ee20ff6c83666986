//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two matrices that must share a shape do not.
    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    /// A NaN or infinite entry was handed to a constructor or parser.
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// A parameter is out of its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix factorization failed to reproduce its input within tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Exhaustive subset enumeration was refused because it would be too large.
    #[error(
        "enumeration of {combinations} subsets exceeds the cap of {cap}; \
         use is_fixed_point spot checks instead"
    )]
    EnumerationTooLarge { combinations: u128, cap: u128 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A CSV, PGM, or config file could not be parsed.
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub fn invalid<S: Into<String>>(message: S) -> Self {
        Error::InvalidArgument(message.into())
    }

    pub fn numerical<S: Into<String>>(message: S) -> Self {
        Error::Numerical(message.into())
    }
}
