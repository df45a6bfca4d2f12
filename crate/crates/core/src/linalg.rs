//! Small dense kernels shared by the statistics and the splitting rules.
//!
//! Reductions use four independent accumulators so that the compiler can
//! vectorize them; the summation order is fixed, so results are identical
//! across runs and thread counts.

use alloc::vec;
use alloc::vec::Vec;

/// Rows per leaf block in pairwise summation over points.
pub(crate) const PAIRWISE_BLOCK: usize = 256;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Squared euclidean distance `||a - b||^2`.
#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        let d0 = x[0] - y[0];
        let d1 = x[1] - y[1];
        let d2 = x[2] - y[2];
        let d3 = x[3] - y[3];
        acc[0] += d0 * d0;
        acc[1] += d1 * d1;
        acc[2] += d2 * d2;
        acc[3] += d3 * d3;
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        let d = x - y;
        tail += d * d;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Pairwise sum of `f(i)` over `items`, with naive summation inside blocks
/// of [`PAIRWISE_BLOCK`].
pub(crate) fn pairwise_sum<T, F>(items: &[T], f: &F) -> f64
where
    F: Fn(&T) -> f64,
{
    if items.len() <= PAIRWISE_BLOCK {
        let mut s = 0.0;
        for it in items {
            s += f(it);
        }
        return s;
    }
    let mid = items.len() / 2;
    pairwise_sum(&items[..mid], f) + pairwise_sum(&items[mid..], f)
}

/// Pairwise accumulation of D-vectors: `out = sum_i g(i, scratch)` where `g`
/// adds item `i`'s contribution into the accumulator it is handed.
pub(crate) fn pairwise_accumulate<T, G>(items: &[T], dim: usize, g: &G) -> Vec<f64>
where
    G: Fn(&T, &mut [f64]),
{
    let mut out = vec![0.0; dim];
    pairwise_accumulate_into(items, g, &mut out);
    out
}

fn pairwise_accumulate_into<T, G>(items: &[T], g: &G, out: &mut [f64])
where
    G: Fn(&T, &mut [f64]),
{
    if items.len() <= PAIRWISE_BLOCK {
        for it in items {
            g(it, out);
        }
        return;
    }
    let mid = items.len() / 2;
    pairwise_accumulate_into(&items[..mid], g, out);
    let mut right = vec![0.0; out.len()];
    pairwise_accumulate_into(&items[mid..], g, &mut right);
    for (o, r) in out.iter_mut().zip(&right) {
        *o += r;
    }
}

/// Eigenvalues of a real symmetric matrix given row-major in `a` (`n x n`),
/// sorted in non-increasing order.
///
/// Householder reduction to tridiagonal form followed by the implicit QL
/// algorithm with Wilkinson-style shifts. Only the lower triangle is read;
/// `a` is overwritten.
pub fn symmetric_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "matrix buffer must be n*n");
    if n == 0 {
        return Vec::new();
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(a, n, &mut d, &mut e);
    tridiagonal_ql(&mut d, &mut e);
    d.sort_by(|x, y| y.total_cmp(x));
    d
}

fn tridiagonalize(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    let idx = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[idx(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[idx(i, l)];
            } else {
                for k in 0..=l {
                    a[idx(i, k)] /= scale;
                    h += a[idx(i, k)] * a[idx(i, k)];
                }
                let f = a[idx(i, l)];
                let g = if f >= 0.0 { -libm::sqrt(h) } else { libm::sqrt(h) };
                e[i] = scale * g;
                h -= f * g;
                a[idx(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[idx(j, k)] * a[idx(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g += a[idx(k, j)] * a[idx(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[idx(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[idx(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[idx(j, k)] -= f * e[k] + g * a[idx(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[idx(i, l)];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a[idx(i, i)];
    }
    // Sub-diagonal in e[0..n-1].
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
}

fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                // Unreachable for symmetric input; keep the current estimate.
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..11).map(|i| i as f64 * 0.5 - 2.0).collect();
        let b: Vec<f64> = (0..11).map(|i| (i * i) as f64 * 0.1).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
        assert!((dist_sq(&a, &b) - a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let mut m = vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        assert_eq!(symmetric_eigenvalues(&mut m, 3), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn eigenvalues_of_2x2() {
        // [[2,1],[1,2]] -> 3, 1
        let mut m = vec![2.0, 1.0, 1.0, 2.0];
        let ev = symmetric_eigenvalues(&mut m, 2);
        assert!((ev[0] - 3.0).abs() < 1e-14);
        assert!((ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_preserve_trace_and_frobenius() {
        let n = 7;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = ((i * 31 + j * 17) % 13) as f64 - 6.0;
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        let trace: f64 = (0..n).map(|i| m[i * n + i]).sum();
        let fro: f64 = m.iter().map(|v| v * v).sum();
        let ev = symmetric_eigenvalues(&mut m.clone(), n);
        assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-10);
        assert!((ev.iter().map(|v| v * v).sum::<f64>() - fro).abs() < 1e-9);
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let items: Vec<u32> = (0..10_000).collect();
        assert_eq!(pairwise_sum(&items, &|&i| i as f64), 49_995_000.0);
    }
}
