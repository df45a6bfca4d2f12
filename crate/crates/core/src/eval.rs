//! Quality measures for partition trees: vector-quantization error,
//! per-split diameter reduction, and covariance spectra.
//!
//! Spectra use the unnormalized covariance `C = X^T X` of the mean-centered
//! points, so `sum(λ) = sum ||x - mean||^2` and `Δa^2 = 2 sum(λ) / n`. The
//! directional variance `V(S, p)` carries a `1/n`, hence `V(S, p) <= λ1 / n`.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{avg_diameter_sq, combine_pair, heuristic_diameter_sq, subset_mean, sum_dist_sq};
use crate::geometry::{Dataset, PointSubset};
use crate::linalg::{dot, symmetric_eigenvalues};
use crate::tree::{NodeKind, PartitionTree, Split};
use crate::{Error, Result};

fn check_tree_data(tree: &PartitionTree, data: &Dataset) -> Result<()> {
    if tree.dim() != data.dim() {
        return Err(Error::DimensionMismatch { expected: tree.dim(), actual: data.dim() });
    }
    if tree.n_points() != data.n() {
        return Err(Error::ShapeMismatch { expected: tree.n_points(), actual: data.n() });
    }
    Ok(())
}

/// Mean squared distance from each point to the mean of its part, with the
/// tree cut at `depth` (a depth beyond the tree's just yields its leaves).
pub fn vq_error(tree: &PartitionTree, data: &Dataset, depth: u32) -> Result<f64> {
    check_tree_data(tree, data)?;
    let total: f64 = tree
        .partition_at_depth(depth)
        .iter()
        .map(|part| {
            let s = PointSubset::trusted(data, part);
            sum_dist_sq(&s, &subset_mean(&s))
        })
        .sum();
    Ok(total / data.n() as f64)
}

/// Diameter reduction achieved by one internal node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatio {
    pub node_id: u64,
    pub depth: u32,
    /// `Δa^2(S1, S2) / Δa^2(S)`
    pub ratio: f64,
    pub sphere: bool,
}

/// Ratio `Δa^2(S1, S2) / Δa^2(S)` for every internal node with `Δa^2(S) > 0`.
pub fn split_ratios(tree: &PartitionTree, data: &Dataset) -> Result<Vec<SplitRatio>> {
    check_tree_data(tree, data)?;
    let nodes = tree.nodes();
    let mut diam = vec![0.0; nodes.len()];
    let mut size = vec![0usize; nodes.len()];
    for pos in 0..nodes.len() {
        let idx = tree.subset_of(pos);
        size[pos] = idx.len();
        diam[pos] = avg_diameter_sq(&PointSubset::trusted(data, &idx));
    }
    let mut out = Vec::new();
    for (pos, node) in nodes.iter().enumerate() {
        if let NodeKind::Internal { split, children: [l, r] } = &node.kind {
            if diam[pos] > 0.0 {
                out.push(SplitRatio {
                    node_id: node.id,
                    depth: node.depth,
                    ratio: combine_pair(diam[*l], size[*l], diam[*r], size[*r]) / diam[pos],
                    sphere: matches!(split, Split::Sphere { .. }),
                });
            }
        }
    }
    Ok(out)
}

/// Per-depth aggregate of [`split_ratios`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthReduction {
    pub depth: u32,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    pub splits: usize,
}

pub fn diameter_reduction_profile(tree: &PartitionTree, data: &Dataset) -> Result<Vec<DepthReduction>> {
    let ratios = split_ratios(tree, data)?;
    let mut out: Vec<DepthReduction> = Vec::new();
    for r in ratios {
        match out.last_mut() {
            Some(last) if last.depth == r.depth => {
                last.mean_ratio += r.ratio;
                last.max_ratio = last.max_ratio.max(r.ratio);
                last.splits += 1;
            }
            _ => out.push(DepthReduction { depth: r.depth, mean_ratio: r.ratio, max_ratio: r.ratio, splits: 1 }),
        }
    }
    for d in &mut out {
        d.mean_ratio /= d.splits as f64;
    }
    Ok(out)
}

/// Eigenvalues `λ1 >= ... >= λD >= 0` of a point set's covariance `X^T X`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<f64>,
}

impl SpectrumSummary {
    pub fn new(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        SpectrumSummary { eigenvalues }
    }

    pub fn top(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.top() <= 0.0
    }

    /// `k = (1/λ1) sum_{i<=d} λi`, between 1 and `d`.
    pub fn k_statistic(&self, d: usize) -> f64 {
        let top = self.top();
        if top <= 0.0 {
            return 1.0;
        }
        self.eigenvalues.iter().take(d).sum::<f64>() / top
    }

    /// `sum_{i<=d} λi^{2t+1} / sum_{i<=d} λi^{2t}`, evaluated on `λi/λ1` to
    /// stay in range and scaled back by `λ1`. `d` is clamped to `D`.
    pub fn power_ratio(&self, t: u32, d: usize) -> f64 {
        let top = self.top();
        if top <= 0.0 {
            return 0.0;
        }
        let (mut num, mut den) = (0.0, 0.0);
        for &l in self.eigenvalues.iter().take(d) {
            let mu = l / top;
            let m2t = libm::pow(mu, 2.0 * t as f64);
            num += m2t * mu;
            den += m2t;
        }
        top * num / den
    }
}

/// Spectrum of the centered covariance of `s`.
///
/// Uses the `D x D` matrix `X^T X` when `n >= D`, otherwise the `n x n`
/// inner-product matrix `X X^T` (same non-zero eigenvalues), padded with
/// zeros to length `D`.
pub fn covariance_spectrum(s: &PointSubset<'_>) -> Result<SpectrumSummary> {
    if s.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, actual: s.len() });
    }
    let dim = s.dim();
    if heuristic_diameter_sq(s) == 0.0 {
        return Ok(SpectrumSummary { eigenvalues: vec![0.0; dim] });
    }
    let mean = subset_mean(s);
    let centered: Vec<Vec<f64>> =
        s.rows().map(|x| x.iter().zip(&mean).map(|(a, m)| a - m).collect()).collect();
    let n = centered.len();
    let (mut matrix, size) = if n >= dim {
        let mut c = vec![0.0; dim * dim];
        for y in &centered {
            for j in 0..dim {
                let yj = y[j];
                let row = &mut c[j * dim..j * dim + j + 1];
                for (cjk, yk) in row.iter_mut().zip(&y[..=j]) {
                    *cjk += yj * yk;
                }
            }
        }
        (c, dim)
    } else {
        let mut g = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..=a {
                g[a * n + b] = dot(&centered[a], &centered[b]);
            }
        }
        (g, n)
    };
    // The eigen-solver reads the lower triangle only.
    let mut ev = symmetric_eigenvalues(&mut matrix, size);
    // Negative values are rounding noise of a PSD matrix.
    for v in &mut ev {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    ev.resize(dim, 0.0);
    Ok(SpectrumSummary { eigenvalues: ev })
}

/// Local covariance dimension `(d, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalDim {
    pub d: usize,
    /// The spectrum was all zero; `d` is 1 by convention.
    pub degenerate: bool,
}

/// Smallest `d` with `sum_{i<=d} λi >= (1 - ε) sum_i λi`.
pub fn local_cov_dim(spec: &SpectrumSummary, eps: f64) -> Result<LocalDim> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidConfig("epsilon must lie in (0, 1)"));
    }
    let total = spec.total();
    if total <= 0.0 {
        return Ok(LocalDim { d: 1, degenerate: true });
    }
    let target = (1.0 - eps) * total;
    let mut acc = 0.0;
    for (i, &l) in spec.eigenvalues.iter().enumerate() {
        acc += l;
        if acc >= target {
            return Ok(LocalDim { d: i + 1, degenerate: false });
        }
    }
    Ok(LocalDim { d: spec.eigenvalues.len(), degenerate: false })
}
