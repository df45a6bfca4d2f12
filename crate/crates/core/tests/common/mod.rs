#![allow(dead_code)]

use apd_core::{Dataset, RngStream};

/// `n x dim` standard normal matrix with per-column scales.
pub fn gaussian(n: usize, dim: usize, seed: u64, scales: &[f64]) -> Dataset {
    let mut rng = RngStream::new(seed, 0xDA7A);
    let values = (0..n * dim).map(|k| rng.standard_normal() * scales[k % dim]).collect();
    Dataset::new(n, dim, values).unwrap()
}

pub fn random_data(n: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = RngStream::new(seed, 0xF00D);
    let scales: Vec<f64> = (0..dim).map(|_| 0.2 + 3.0 * rng.uniform()).collect();
    let shift: Vec<f64> = (0..dim).map(|_| 10.0 * rng.uniform() - 5.0).collect();
    let values = (0..n * dim).map(|k| shift[k % dim] + rng.standard_normal() * scales[k % dim]).collect();
    Dataset::new(n, dim, values).unwrap()
}

/// Rows drawn from a small pool so that many coincide.
pub fn duplicate_heavy(n: usize, dim: usize, distinct: usize, seed: u64) -> Dataset {
    let pool = random_data(distinct.max(1), dim, seed);
    let mut rng = RngStream::new(seed, 0xD0B);
    let mut values = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let k = (rng.next_u64() % pool.n() as u64) as usize;
        values.extend_from_slice(pool.row(k));
    }
    Dataset::new(n, dim, values).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
