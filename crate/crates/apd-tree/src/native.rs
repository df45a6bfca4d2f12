//! Native dataset files.
//!
//! ```text
//! "APDS"  magic
//! u32     version (1)
//! u64     n
//! u64     dim
//! f64     n * dim values, row-major
//! ```
//! All integers and floats little-endian.

use std::fs;
use std::path::Path;

use apd_core::Dataset;

use crate::binary::{Reader, Writer};
use crate::error::{AppError, FormatError, Result};

pub const DATASET_MAGIC: [u8; 4] = *b"APDS";
pub const DATASET_VERSION: u32 = 1;

pub fn encode_dataset(data: &Dataset) -> Vec<u8> {
    let mut w = Writer::default();
    w.buf.reserve(24 + data.values().len() * 8);
    w.buf.extend_from_slice(&DATASET_MAGIC);
    w.u32(DATASET_VERSION);
    w.u64(data.n() as u64);
    w.u64(data.dim() as u64);
    w.f64s(data.values());
    w.buf
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset, FormatError> {
    let mut r = Reader::new(bytes);
    r.magic(DATASET_MAGIC)?;
    let version = r.u32()?;
    if version != DATASET_VERSION {
        return Err(FormatError::Version(version));
    }
    let n = r.usize()?;
    let dim = r.usize()?;
    let len = n.checked_mul(dim).ok_or(FormatError::Truncated)?;
    let values = r.f64s(len)?;
    r.finish()?;
    Dataset::new(n, dim, values).map_err(|e| FormatError::Corrupt(e.to_string()))
}

pub fn save_dataset(path: &Path, data: &Dataset) -> Result<()> {
    fs::write(path, encode_dataset(data)).map_err(|e| AppError::io(path, e))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    decode_dataset(&bytes).map_err(|source| AppError::Format { path: path.to_path_buf(), source })
}
