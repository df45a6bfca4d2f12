use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// IDX image-file failures.
#[derive(Debug, Error)]
pub enum IdxError {
    #[error("not an IDX image file: magic 0x{found:08x}, expected 0x00000803")]
    BadMagic { found: u32 },
    #[error("truncated IDX file: need {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("IDX header declares {images} images of {rows}x{cols}; file holds {actual} bytes, expected {expected}")]
    DimensionMismatch { images: usize, rows: usize, cols: usize, expected: usize, actual: usize },
    #[error("IDX file declares an empty dataset ({images} images of {rows}x{cols})")]
    Empty { images: usize, rows: usize, cols: usize },
}

/// Delimited-text failures. Line numbers are 1-based.
#[derive(Debug, Error, PartialEq)]
pub enum DelimitedError {
    #[error("no data rows")]
    Empty,
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("line {line}, column {column}: {text:?} is not a finite number")]
    NonNumeric { line: usize, column: usize, text: String },
    #[error("line {line}: skipped column {column} does not exist")]
    MissingColumn { line: usize, column: usize },
    #[error("line {line}: every column is skipped")]
    NoFeatures { line: usize },
}

/// Native dataset and tree file failures.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {found:?}, expected {expected:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("file ends early")]
    Truncated,
    #[error("trailing bytes after the end of the data")]
    Trailing,
    #[error("corrupt file: {0}")]
    Corrupt(String),
}

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Idx { path: PathBuf, source: IdxError },
    #[error("{path}: {source}")]
    Delimited { path: PathBuf, source: DelimitedError },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Core(#[from] apd_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("writing output: {0}")]
    Output(#[source] io::Error),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    /// Exit status for this error: 2 for bad invocations, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;
