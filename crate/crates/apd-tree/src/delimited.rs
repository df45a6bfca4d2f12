//! Delimited numeric text: one point per line.
//!
//! Blank lines and lines whose first non-space character is `#` are
//! skipped. Fields are split on a single delimiter character, or on runs of
//! whitespace when no delimiter is given. Columns listed in `skip_columns`
//! (0-based, counted before skipping) are dropped, which is how id and label
//! columns of tabular datasets are removed.

use std::fs;
use std::path::Path;

use apd_core::Dataset;

use crate::error::{AppError, DelimitedError, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DelimitedOptions {
    /// `None` splits on whitespace.
    pub delimiter: Option<char>,
    pub skip_columns: Vec<usize>,
}

impl DelimitedOptions {
    pub fn whitespace() -> Self {
        DelimitedOptions::default()
    }

    pub fn with_delimiter(delimiter: char) -> Self {
        DelimitedOptions { delimiter: Some(delimiter), skip_columns: Vec::new() }
    }
}

pub fn parse_delimited(text: &str, opts: &DelimitedOptions) -> Result<Dataset, DelimitedError> {
    let mut values = Vec::new();
    let mut width: Option<(usize, usize)> = None; // (raw fields, kept fields)
    let mut n = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = match opts.delimiter {
            Some(d) => trimmed.split(d).map(str::trim).collect(),
            None => trimmed.split_whitespace().collect(),
        };
        match width {
            None => {
                if let Some(&c) = opts.skip_columns.iter().find(|&&c| c >= fields.len()) {
                    return Err(DelimitedError::MissingColumn { line, column: c });
                }
                let kept = (0..fields.len()).filter(|c| !opts.skip_columns.contains(c)).count();
                if kept == 0 {
                    return Err(DelimitedError::NoFeatures { line });
                }
                width = Some((fields.len(), kept));
            }
            Some((expected, _)) if fields.len() != expected => {
                return Err(DelimitedError::Ragged { line, expected, found: fields.len() });
            }
            Some(_) => {}
        }
        for (column, field) in fields.iter().enumerate() {
            if opts.skip_columns.contains(&column) {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(DelimitedError::NonNumeric { line, column: column + 1, text: field.to_string() })
                }
            }
        }
        n += 1;
    }
    let (_, dim) = width.ok_or(DelimitedError::Empty)?;
    Ok(Dataset::new(n, dim, values).expect("rows validated above"))
}

pub fn load_delimited(path: &Path, opts: &DelimitedOptions) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_delimited(&text, opts).map_err(|source| AppError::Delimited { path: path.to_path_buf(), source })
}
