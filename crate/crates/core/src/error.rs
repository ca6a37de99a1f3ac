use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two of the four window values compare equal; ties must be broken first.
    #[error("tie among window values {0:?}")]
    Tie([f64; 4]),

    #[error("delay {delay} too large for a {rows}x{cols} grid")]
    DelayTooLarge {
        delay: usize,
        rows: usize,
        cols: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported format for {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("failed to decode {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
