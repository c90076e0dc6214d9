use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("range error: {0}")]
    Range(String),

    /// The requested quantity is undefined at this point (e.g. a GDoF with zero delivery time).
    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("file size {file_bits} is not divisible by C({k},{t}) = {subfiles}; F must be a multiple of {subfiles}")]
    Divisibility {
        k: usize,
        t: usize,
        file_bits: usize,
        subfiles: usize,
    },

    #[error("invalid demand vector: {0}")]
    Demand(String),

    /// Decoding could not recover a demanded file. Indicates a placement or delivery bug.
    #[error("reconstruction failed for user {user}: {reason}")]
    Reconstruction { user: usize, reason: String },

    #[error("channel estimate is numerically singular (condition number {condition:.3e})")]
    Singular { condition: f64 },

    #[error("slope fit rejected: {0}")]
    Fit(String),

    /// A binary transmission-log dump could not be parsed.
    #[error("malformed log dump: {0}")]
    Format(String),
}

pub(crate) fn range_err(msg: impl Into<String>) -> Error {
    Error::Range(msg.into())
}
