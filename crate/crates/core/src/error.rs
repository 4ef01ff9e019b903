use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates its invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("index out of range: {what} {index} (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    /// Pairing requires an even number of users.
    #[error("pairing requires an even number of users, got {0}")]
    OddUserCount(usize),

    #[error("scenario has no users")]
    NoUsers,

    #[error("solution vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("config file {path}:{line}: {msg}")]
    ConfigFile {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
