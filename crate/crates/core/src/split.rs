//! Splitting rules: how a node picks the normal of its splitting hyperplane.
//!
//! All three rules share one kernel, a matrix-free power step
//! `q = sum_h ((x_h - m) . p) (x_h - m)` over the node's points, which is
//! `C p` for the node covariance `C = X^T X` of the mean-centered points.
//! The step makes a single pass over the rows (dot product, then
//! accumulate), so `t` iterations cost `O(t n D)` and the `D x D`
//! covariance is never formed.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{heuristic_diameter_sq, subset_mean, PointSubset};
use crate::linalg::{axpy, dot, norm, pairwise_accumulate};
use crate::rng::RngStream;
use crate::{Error, Result};

/// Below this norm a power step is treated as the zero vector.
pub const DEGENERATE_NORM: f64 = 1e-300;

/// Floor on the PCA step cap; `10 * D` alone is too few for small `D`.
pub const MIN_PCA_STEP_CAP: usize = 1000;

/// Default relative convergence threshold of the PCA rule.
pub const DEFAULT_PCA_TOLERANCE: f64 = 1e-10;

/// Policy for choosing a node's projection direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitRule {
    /// Uniformly random direction. Same draws as `Apd { iterations: 0 }`.
    Rp,
    /// Random direction refined by `iterations` power steps.
    Apd { iterations: u32 },
    /// Power method run until the Rayleigh quotient settles.
    Pca { tolerance: f64 },
}

impl SplitRule {
    pub fn pca() -> Self {
        SplitRule::Pca { tolerance: DEFAULT_PCA_TOLERANCE }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SplitRule::Rp => "rp",
            SplitRule::Apd { .. } => "apd",
            SplitRule::Pca { .. } => "pca",
        }
    }

    /// Power iterations for the randomized rules; 0 for RP and PCA.
    pub fn iterations(&self) -> u32 {
        match *self {
            SplitRule::Apd { iterations } => iterations,
            _ => 0,
        }
    }

    pub fn is_randomized(&self) -> bool {
        !matches!(self, SplitRule::Pca { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SplitRule::Pca { tolerance } if !(tolerance > 0.0 && tolerance.is_finite()) => {
                Err(Error::InvalidConfig("pca tolerance must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Direction for the points of `s`, drawing from `rng`.
    pub fn direction(&self, s: &PointSubset<'_>, rng: &mut RngStream) -> Direction {
        let mean = subset_mean(s);
        let mut dir = self.direction_with_mean(s, &mean, rng);
        if self.iterations() > 0 || matches!(self, SplitRule::Pca { .. }) {
            flag_coincident(s, &mut dir);
        }
        dir
    }

    pub(crate) fn direction_with_mean(
        &self,
        s: &PointSubset<'_>,
        mean: &[f64],
        rng: &mut RngStream,
    ) -> Direction {
        match *self {
            SplitRule::Rp => power_iterate(s, mean, rng, 0),
            SplitRule::Apd { iterations } => power_iterate(s, mean, rng, iterations as usize),
            SplitRule::Pca { tolerance } => power_converge(s, mean, rng, tolerance),
        }
    }
}

impl fmt::Display for SplitRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitRule::Apd { iterations } => write!(f, "apd(t={iterations})"),
            other => f.write_str(other.name()),
        }
    }
}

/// A unit projection direction and how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub vector: Vec<f64>,
    /// The random unit vector the power steps started from.
    pub start: Vec<f64>,
    /// Power steps actually applied.
    pub iterations: usize,
    /// A power step collapsed to (numerically) zero; `vector` is the last
    /// good iterate and the node should not be split.
    pub degenerate: bool,
}

/// A direction uniform on the unit sphere.
pub fn random_unit_vector(rng: &mut RngStream, dim: usize) -> Vec<f64> {
    rng.unit_vector(dim)
}

/// Random start followed by exactly `t` power steps.
pub fn apd_direction(s: &PointSubset<'_>, t: usize, rng: &mut RngStream) -> Direction {
    let mean = subset_mean(s);
    let mut dir = power_iterate(s, &mean, rng, t);
    if t > 0 {
        flag_coincident(s, &mut dir);
    }
    dir
}

/// Principal direction by power iteration to relative tolerance `tol`.
pub fn pca_direction(s: &PointSubset<'_>, tol: f64, rng: &mut RngStream) -> Result<Direction> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidConfig("pca tolerance must be positive"));
    }
    let mean = subset_mean(s);
    let mut dir = power_converge(s, &mean, rng, tol);
    flag_coincident(s, &mut dir);
    Ok(dir)
}

/// Identical points have no covariance; rounding in the mean can still make
/// the power step look non-zero, so check the points themselves.
fn flag_coincident(s: &PointSubset<'_>, dir: &mut Direction) {
    if !dir.degenerate && heuristic_diameter_sq(s) == 0.0 {
        dir.vector = dir.start.clone();
        dir.iterations = 0;
        dir.degenerate = true;
    }
}

/// One fused pass. Returns `q = C p` and `V(S, p)`.
fn power_step(s: &PointSubset<'_>, mean: &[f64], p: &[f64]) -> (Vec<f64>, f64) {
    let dim = s.dim();
    let data = s.dataset();
    let offset = dot(mean, p);
    // Accumulator layout: [sum c_h x_h (dim) | sum c_h | sum c_h^2].
    let acc = pairwise_accumulate(s.indices(), dim + 2, &|&i, acc: &mut [f64]| {
        let x = data.row(i);
        let c = dot(x, p) - offset;
        axpy(c, x, &mut acc[..dim]);
        acc[dim] += c;
        acc[dim + 1] += c * c;
    });
    let mut q = acc[..dim].to_vec();
    // sum c_h (x_h - m) = sum c_h x_h - (sum c_h) m
    axpy(-acc[dim], mean, &mut q);
    (q, acc[dim + 1] / s.len() as f64)
}

fn normalize_step(q: &mut [f64]) -> bool {
    let nq = norm(q);
    if !(nq >= DEGENERATE_NORM) || !nq.is_finite() {
        return false;
    }
    for v in q.iter_mut() {
        *v /= nq;
    }
    true
}

fn power_iterate(s: &PointSubset<'_>, mean: &[f64], rng: &mut RngStream, t: usize) -> Direction {
    let start = random_unit_vector(rng, s.dim());
    let mut p = start.clone();
    for k in 0..t {
        let (mut q, _) = power_step(s, mean, &p);
        if !normalize_step(&mut q) {
            return Direction { vector: p, start, iterations: k, degenerate: true };
        }
        p = q;
    }
    Direction { vector: p, start, iterations: t, degenerate: false }
}

/// Iterates until the Rayleigh quotient `R_k = V(S, p_k)` has settled.
///
/// The increments `R_k - R_{k-1}` of the power method shrink roughly
/// geometrically with ratio `rho`, so the remaining gap to the limit is about
/// `delta * rho / (1 - rho)`. Stopping when `delta / (1 - rho) < tol * R_k`
/// keeps `R` within about `tol` of the top eigenvalue even when the leading
/// eigenvalues are close. Capped at `max(10 * D, 1000)` steps.
fn power_converge(s: &PointSubset<'_>, mean: &[f64], rng: &mut RngStream, tol: f64) -> Direction {
    let start = random_unit_vector(rng, s.dim());
    let cap = (10 * s.dim()).max(MIN_PCA_STEP_CAP);
    let mut p = start.clone();
    let mut prev_r: Option<f64> = None;
    let mut prev_delta: Option<f64> = None;
    for k in 0..cap {
        let (mut q, r) = power_step(s, mean, &p);
        if let Some(pr) = prev_r {
            let delta = (r - pr).abs();
            let rho = match prev_delta {
                Some(pd) if pd > 0.0 => (delta / pd).min(0.999_999),
                _ => 0.0,
            };
            if delta <= tol * r * (1.0 - rho) {
                return Direction { vector: p, start, iterations: k, degenerate: false };
            }
            prev_delta = Some(delta);
        }
        prev_r = Some(r);
        if !normalize_step(&mut q) {
            return Direction { vector: p, start, iterations: k, degenerate: true };
        }
        p = q;
    }
    Direction { vector: p, start, iterations: cap, degenerate: false }
}
