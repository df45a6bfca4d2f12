//! Slow, direct reference implementations for tests.
//!
//! Nothing here shares code with the production paths in `apd-core`: means
//! are plain column sums, diameters are all-pairs loops, and the covariance
//! is materialized and handed to nalgebra's symmetric eigen-solver.
//! Costs are `O(n^2 D)` or `O(D^3)`; keep inputs small (n <= 2000, D <= 64).

use apd_core::PointSubset;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Test-suite size caps.
pub const MAX_POINTS: usize = 2000;
pub const MAX_DIM: usize = 64;

fn rows(s: &PointSubset<'_>) -> Vec<Vec<f64>> {
    s.rows().map(<[f64]>::to_vec).collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Column-wise naive average.
pub fn oracle_mean(s: &PointSubset<'_>) -> Vec<f64> {
    let mut m = vec![0.0; s.dim()];
    for r in rows(s) {
        for (mi, v) in m.iter_mut().zip(&r) {
            *mi += v;
        }
    }
    m.iter().map(|v| v / s.len() as f64).collect()
}

/// `(1/|S|^2) sum over ordered pairs ||x - y||^2`.
pub fn oracle_avg_diameter_sq(s: &PointSubset<'_>) -> f64 {
    let r = rows(s);
    let mut total = 0.0;
    for x in &r {
        for y in &r {
            total += sq_dist(x, y);
        }
    }
    total / (r.len() * r.len()) as f64
}

/// `max ||x - y||^2` over all pairs.
pub fn oracle_max_diameter_sq(s: &PointSubset<'_>) -> f64 {
    let r = rows(s);
    let mut best = 0.0f64;
    for (i, x) in r.iter().enumerate() {
        for y in &r[i + 1..] {
            best = best.max(sq_dist(x, y));
        }
    }
    best
}

/// Exact outlier condition `Δ^2(S) > c Δa^2(S)`.
pub fn oracle_exact_outlier(s: &PointSubset<'_>, c: f64) -> bool {
    oracle_max_diameter_sq(s) > c * oracle_avg_diameter_sq(s)
}

/// Centered covariance `X^T X` as a dense matrix.
pub fn oracle_covariance(s: &PointSubset<'_>) -> DMatrix<f64> {
    assert!(s.dim() <= MAX_DIM, "oracle covariance is capped at D <= {MAX_DIM}");
    let mean = oracle_mean(s);
    let r = rows(s);
    let x = DMatrix::from_fn(r.len(), s.dim(), |i, j| r[i][j] - mean[j]);
    x.transpose() * x
}

/// `C^t v / ||C^t v||` with `C` materialized; `None` if the result is zero.
pub fn oracle_covariance_power_apply(s: &PointSubset<'_>, v: &[f64], t: usize) -> Option<Vec<f64>> {
    let c = oracle_covariance(s);
    let mut w = DVector::from_column_slice(v);
    for _ in 0..t {
        w = &c * w;
    }
    let n = w.norm();
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some((w / n).iter().copied().collect())
}

/// Eigenvalues (descending) and matching orthonormal eigenvectors of `X^T X`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub covariance: DMatrix<f64>,
}

impl Eigen {
    /// Coordinates of `q` in the eigenbasis.
    pub fn coefficients(&self, q: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|p| p.iter().zip(q).map(|(a, b)| a * b).sum()).collect()
    }

    /// `||C - P Λ P^T||_F`
    pub fn reconstruction_error(&self) -> f64 {
        let d = self.values.len();
        let p = DMatrix::from_fn(d, d, |i, j| self.vectors[j][i]);
        let l = DMatrix::from_diagonal(&DVector::from_column_slice(&self.values));
        (&self.covariance - &p * l * p.transpose()).norm()
    }

    /// `max |P^T P - I|`
    pub fn orthonormality_error(&self) -> f64 {
        let d = self.values.len();
        let p = DMatrix::from_fn(d, d, |i, j| self.vectors[j][i]);
        (p.transpose() * p - DMatrix::identity(d, d)).abs().max()
    }
}

pub fn oracle_eigendecomposition(s: &PointSubset<'_>) -> Eigen {
    let c = oracle_covariance(s);
    let eig = SymmetricEigen::new(c.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    Eigen {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect(),
        covariance: c,
    }
}

/// VQ error from pairwise diameters: `sum |Si| Δa^2(Si) / (2|S|)`.
pub fn oracle_vq_from_diameters(data_n: usize, parts: &[PointSubset<'_>]) -> f64 {
    parts.iter().map(|p| p.len() as f64 * oracle_avg_diameter_sq(p)).sum::<f64>() / (2.0 * data_n as f64)
}
