//! Point sets and their diameter and variance statistics.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, dist_sq, dot, pairwise_accumulate, pairwise_sum};
use crate::{Error, Result};

/// Tolerance on `||p|| - 1` accepted by [`directional_variance`].
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// An immutable `n x dim` matrix of finite reals, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    dim: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(n: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(Error::EmptyDataset);
        }
        let expected = n.checked_mul(dim).ok_or(Error::EmptyDataset)?;
        if values.len() != expected {
            return Err(Error::ShapeMismatch { expected, actual: values.len() });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / dim, col: pos % dim });
        }
        Ok(Dataset { n, dim, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: r.len() });
            }
            values.extend_from_slice(r);
        }
        Dataset::new(rows.len(), dim, values)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major backing buffer.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// A subset holding every row, in index order.
    pub fn all(&self) -> PointSubset<'_> {
        PointSubset { data: self, indices: IndexBuf::Owned((0..self.n).collect()) }
    }
}

#[derive(Debug, Clone)]
enum IndexBuf<'a> {
    Borrowed(&'a [usize]),
    Owned(Vec<usize>),
}

/// A non-empty view of some rows of a [`Dataset`], addressed by index.
#[derive(Debug, Clone)]
pub struct PointSubset<'a> {
    data: &'a Dataset,
    indices: IndexBuf<'a>,
}

impl<'a> PointSubset<'a> {
    /// Validating constructor: indices must be non-empty, unique and in range.
    pub fn new(data: &'a Dataset, indices: &'a [usize]) -> Result<Self> {
        validate_indices(data.n, indices)?;
        Ok(PointSubset { data, indices: IndexBuf::Borrowed(indices) })
    }

    pub fn from_vec(data: &'a Dataset, indices: Vec<usize>) -> Result<Self> {
        validate_indices(data.n, &indices)?;
        Ok(PointSubset { data, indices: IndexBuf::Owned(indices) })
    }

    /// Caller guarantees the subset invariants.
    pub(crate) fn trusted(data: &'a Dataset, indices: &'a [usize]) -> Self {
        debug_assert!(validate_indices(data.n, indices).is_ok());
        PointSubset { data, indices: IndexBuf::Borrowed(indices) }
    }

    #[inline]
    pub fn dataset(&self) -> &'a Dataset {
        self.data
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        match &self.indices {
            IndexBuf::Borrowed(s) => s,
            IndexBuf::Owned(v) => v,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.indices().len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.dim
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.indices().iter().map(move |&i| self.data.row(i))
    }
}

fn validate_indices(n: usize, indices: &[usize]) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut seen = vec![false; n];
    for &i in indices {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        if core::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(())
}

/// `mean(S)`: the arithmetic mean of the selected rows.
pub fn subset_mean(s: &PointSubset<'_>) -> Vec<f64> {
    let data = s.dataset();
    let mut sum = pairwise_accumulate(s.indices(), s.dim(), &|&i, acc: &mut [f64]| {
        for (a, x) in acc.iter_mut().zip(data.row(i)) {
            *a += x;
        }
    });
    let inv = s.len() as f64;
    for v in &mut sum {
        *v /= inv;
    }
    sum
}

/// Sum of squared distances to `center`.
pub(crate) fn sum_dist_sq(s: &PointSubset<'_>, center: &[f64]) -> f64 {
    let data = s.dataset();
    pairwise_sum(s.indices(), &|&i| dist_sq(data.row(i), center))
}

/// Squared average diameter `(2/|S|) * sum ||x - mean(S)||^2`.
///
/// Equal to the mean of `||x - y||^2` over all ordered pairs of `S`.
pub fn avg_diameter_sq(s: &PointSubset<'_>) -> f64 {
    let mean = subset_mean(s);
    2.0 * sum_dist_sq(s, &mean) / s.len() as f64
}

/// Size-weighted mean of the two parts' squared average diameters.
pub fn avg_diameter_sq_pair(s1: &PointSubset<'_>, s2: &PointSubset<'_>) -> f64 {
    combine_pair(avg_diameter_sq(s1), s1.len(), avg_diameter_sq(s2), s2.len())
}

pub(crate) fn combine_pair(d1: f64, n1: usize, d2: f64, n2: usize) -> f64 {
    (d1 * n1 as f64 + d2 * n2 as f64) / (n1 + n2) as f64
}

/// Squared heuristic diameter: the largest squared distance from the
/// subset's first point (in index order) to any point of the subset.
pub fn heuristic_diameter_sq(s: &PointSubset<'_>) -> f64 {
    let anchor = s.rows().next().expect("subset is non-empty");
    s.rows().map(|x| dist_sq(x, anchor)).fold(0.0, f64::max)
}

/// `V(S, p) = (1/|S|) * sum ((x - mean(S)) . p)^2`.
pub fn directional_variance(s: &PointSubset<'_>, p: &[f64]) -> Result<f64> {
    if p.len() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), actual: p.len() });
    }
    let norm = linalg::norm(p);
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NotUnit { norm });
    }
    let mean = subset_mean(s);
    Ok(directional_variance_centered(s, &mean, p))
}

pub(crate) fn directional_variance_centered(s: &PointSubset<'_>, mean: &[f64], p: &[f64]) -> f64 {
    let offset = dot(mean, p);
    let data = s.dataset();
    let total = pairwise_sum(s.indices(), &|&i| {
        let v = dot(data.row(i), p) - offset;
        v * v
    });
    total / s.len() as f64
}

/// Diameter statistics of one node's point set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiameterStats {
    pub avg_diameter_sq: f64,
    pub heuristic_diameter_sq: f64,
    pub mean: Vec<f64>,
}

impl DiameterStats {
    pub fn compute(s: &PointSubset<'_>) -> Self {
        let mean = subset_mean(s);
        let data = s.dataset();
        let heuristic = heuristic_diameter_sq(s);
        let sum = pairwise_sum(s.indices(), &|&i| dist_sq(data.row(i), &mean));
        DiameterStats {
            avg_diameter_sq: 2.0 * sum / s.len() as f64,
            heuristic_diameter_sq: heuristic,
            mean,
        }
    }

    /// All points coincide.
    pub fn is_degenerate(&self) -> bool {
        self.heuristic_diameter_sq == 0.0
    }
}
