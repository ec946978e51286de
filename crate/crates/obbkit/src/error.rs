//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A geometric input violated its invariants (non-finite values,
    /// non-positive sizes, degenerate polygons, ...).
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// An argument was outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Parallel list lengths did not match.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A class id or class name was not present in the class table.
    #[error("class table: {0}")]
    ClassTable(String),

    /// A text file could not be parsed; the line number is 1-based.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Categories in an annotation file that are absent from the class
    /// table. The file is rejected as a whole unless the caller opted
    /// into skipping unknown categories.
    #[error("{path}: unknown categories: {}", names.join(", "))]
    UnknownCategories { path: PathBuf, names: Vec<String> },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::InvalidGeometry(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
