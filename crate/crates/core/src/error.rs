use core::fmt;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A dataset needs at least one point and one dimension.
    EmptyDataset,
    /// Matrix buffer length does not match `n * dim`.
    ShapeMismatch { expected: usize, actual: usize },
    /// A NaN or infinite coordinate at (row, column).
    NonFinite { row: usize, col: usize },
    /// A subset must contain at least one index.
    EmptySubset,
    IndexOutOfRange { index: usize, n: usize },
    DuplicateIndex(usize),
    /// A vector's length does not match the dataset dimension.
    DimensionMismatch { expected: usize, actual: usize },
    /// Direction vectors must have unit norm.
    NotUnit { norm: f64 },
    /// Splitting needs at least two points.
    TooFewPoints { needed: usize, actual: usize },
    InvalidConfig(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyDataset => write!(f, "dataset must have n >= 1 and dim >= 1"),
            Error::ShapeMismatch { expected, actual } => {
                write!(f, "matrix has {actual} entries, expected {expected}")
            }
            Error::NonFinite { row, col } => {
                write!(f, "non-finite value at row {row}, column {col}")
            }
            Error::EmptySubset => write!(f, "point subset is empty"),
            Error::IndexOutOfRange { index, n } => {
                write!(f, "index {index} out of range for {n} points")
            }
            Error::DuplicateIndex(i) => write!(f, "index {i} appears more than once"),
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "vector has dimension {actual}, expected {expected}")
            }
            Error::NotUnit { norm } => write!(f, "direction has norm {norm}, expected 1"),
            Error::TooFewPoints { needed, actual } => {
                write!(f, "need at least {needed} points, got {actual}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
