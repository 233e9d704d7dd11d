use std::io;

use thiserror::Error;

/// Errors produced by the tactile pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),

    #[error("truncated payload: {0}")]
    Truncated(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("duplicate pixel ({row}, {col}) in measurement plan")]
    DuplicatePixel { row: usize, col: usize },

    #[error("timestamps must be strictly increasing (frame {0})")]
    NonMonotoneTimestamps(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("no contact detected within {0} us")]
    NoContact(u64),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for errors caused by malformed or inconsistent data rather than
    /// numerical breakdown.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_) | Error::NonFinite(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
