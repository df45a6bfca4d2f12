//! IDX3 image files, the format MNIST ships in.
//!
//! Layout: magic `0x00000803`, then image count, rows and columns as
//! big-endian `u32`, then one unsigned byte per pixel, image by image in
//! row-major order.

use std::fs;
use std::path::Path;

use apd_core::Dataset;

use crate::error::{AppError, IdxError, Result};

pub const IDX3_MAGIC: u32 = 0x0000_0803;
const HEADER_LEN: usize = 16;

/// Header fields of an IDX3 file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdxHeader {
    pub images: usize,
    pub rows: usize,
    pub cols: usize,
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

pub fn parse_header(bytes: &[u8]) -> Result<IdxHeader, IdxError> {
    if bytes.len() < 4 {
        return Err(IdxError::Truncated { expected: HEADER_LEN, actual: bytes.len() });
    }
    let magic = be_u32(bytes, 0);
    if magic != IDX3_MAGIC {
        return Err(IdxError::BadMagic { found: magic });
    }
    if bytes.len() < HEADER_LEN {
        return Err(IdxError::Truncated { expected: HEADER_LEN, actual: bytes.len() });
    }
    Ok(IdxHeader {
        images: be_u32(bytes, 4) as usize,
        rows: be_u32(bytes, 8) as usize,
        cols: be_u32(bytes, 12) as usize,
    })
}

/// Decodes an IDX3 buffer into an `images x (rows * cols)` dataset.
/// Pixels stay in `[0, 255]` unless `unit_scale` maps them to `[0, 1]`.
pub fn parse_idx_images(bytes: &[u8], unit_scale: bool) -> Result<(IdxHeader, Dataset), IdxError> {
    let h = parse_header(bytes)?;
    let (images, rows, cols) = (h.images, h.rows, h.cols);
    if images == 0 || rows == 0 || cols == 0 {
        return Err(IdxError::Empty { images, rows, cols });
    }
    let pixels = images
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or(IdxError::DimensionMismatch { images, rows, cols, expected: usize::MAX, actual: bytes.len() })?;
    let expected = HEADER_LEN + pixels;
    if bytes.len() < expected {
        return Err(IdxError::Truncated { expected, actual: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(IdxError::DimensionMismatch { images, rows, cols, expected, actual: bytes.len() });
    }
    let scale = if unit_scale { 1.0 / 255.0 } else { 1.0 };
    let values = bytes[HEADER_LEN..].iter().map(|&b| f64::from(b) * scale).collect();
    let data = Dataset::new(images, rows * cols, values).expect("shape checked above");
    Ok((h, data))
}

pub fn load_idx_images(path: &Path, unit_scale: bool) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    parse_idx_images(&bytes, unit_scale)
        .map(|(_, d)| d)
        .map_err(|source| AppError::Idx { path: path.to_path_buf(), source })
}

/// Encodes raw pixels as an IDX3 buffer. `pixels.len()` must equal
/// `images * rows * cols`.
pub fn encode_idx_images(images: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), images as usize * rows as usize * cols as usize);
    let mut out = Vec::with_capacity(HEADER_LEN + pixels.len());
    for v in [IDX3_MAGIC, images, rows, cols] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}
