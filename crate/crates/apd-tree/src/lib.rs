//! File formats, experiment drivers and the command-line front end for
//! approximate principal direction trees. The numerics live in `apd-core`.

mod binary;
pub mod cli;
pub mod delimited;
pub mod error;
pub mod experiment;
pub mod idx;
pub mod native;
pub mod tree_format;

pub use error::{AppError, DelimitedError, FormatError, IdxError};
