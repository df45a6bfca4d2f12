mod common;

use apd_core::{
    apd_direction, directional_variance, pca_direction, random_unit_vector, Dataset, RngStream,
};
use apd_oracles::{oracle_covariance_power_apply, oracle_eigendecomposition};
use common::{gaussian, max_abs_diff, random_data, rel_err};
use proptest::prelude::*;

#[test]
fn unit_vectors_have_unit_norm() {
    for dim in 1..40 {
        let v = random_unit_vector(&mut RngStream::new(dim as u64, 7), dim);
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() < 1e-12);
    }
}

#[test]
fn unit_vectors_are_centered_on_the_sphere() {
    let draws = 100_000;
    let mut rng = RngStream::new(2024, 0);
    let mut sum = [0.0; 3];
    for _ in 0..draws {
        let v = random_unit_vector(&mut rng, 3);
        for k in 0..3 {
            sum[k] += v[k];
        }
    }
    // Each coordinate of a uniform point on S^2 has variance 1/3.
    let sigma = 1.0 / (3.0 * draws as f64).sqrt();
    for s in sum {
        assert!((s / draws as f64).abs() < 4.0 * sigma);
    }
}

#[test]
fn apd_matches_explicit_covariance_power() {
    let d = random_data(30, 6, 77);
    let dir = apd_direction(&d.all(), 3, &mut RngStream::new(77, 1));
    let want = oracle_covariance_power_apply(&d.all(), &dir.start, 3).unwrap();
    assert!(max_abs_diff(&dir.vector, &want) < 1e-8);
}

#[test]
fn variance_of_refined_direction_in_eigenbasis() {
    let d = random_data(45, 8, 5);
    let eig = oracle_eigendecomposition(&d.all());
    let n = d.n() as f64;
    for t in 0..5u32 {
        let dir = apd_direction(&d.all(), t as usize, &mut RngStream::new(5, t as u64));
        let beta = eig.coefficients(&dir.start);
        let (mut num, mut den) = (0.0, 0.0);
        for (l, b) in eig.values.iter().zip(&beta) {
            num += l.powi(2 * t as i32 + 1) * b * b;
            den += l.powi(2 * t as i32) * b * b;
        }
        let want = num / den / n;
        let got = directional_variance(&d.all(), &dir.vector).unwrap();
        assert!(rel_err(got, want) < 1e-8, "t={t}: {got} vs {want}");
    }
}

#[test]
fn pca_reaches_top_eigenvalue() {
    let d = random_data(200, 10, 9);
    let eig = oracle_eigendecomposition(&d.all());
    let top = eig.values[0] / d.n() as f64;
    let tol = 1e-10;
    let dir = pca_direction(&d.all(), tol, &mut RngStream::new(9, 1)).unwrap();
    let v = directional_variance(&d.all(), &dir.vector).unwrap();
    assert!(v >= (1.0 - tol) * top, "{v} vs {top}");
}

#[test]
fn pca_on_nearly_isotropic_data() {
    // Leading eigenvalues within a few percent of each other.
    let d = gaussian(400, 4, 31, &[1.0, 0.99, 0.98, 0.2]);
    let eig = oracle_eigendecomposition(&d.all());
    let top = eig.values[0] / d.n() as f64;
    let tol = 1e-6;
    for seed in 0..10 {
        let dir = pca_direction(&d.all(), tol, &mut RngStream::new(seed, 1)).unwrap();
        let v = directional_variance(&d.all(), &dir.vector).unwrap();
        assert!(v >= (1.0 - tol) * top, "seed {seed}: {v} vs {top}");
    }
}

#[test]
fn pca_rank_one() {
    let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![0.0, i as f64 * 0.5 - 1.0, 0.0, 0.0]).collect();
    let d = Dataset::from_rows(&rows).unwrap();
    let dir = pca_direction(&d.all(), 1e-10, &mut RngStream::new(0, 0)).unwrap();
    assert!((dir.vector[1].abs() - 1.0).abs() < 1e-10);
}

#[test]
fn directions_are_deterministic() {
    let d = random_data(25, 5, 8);
    for t in 0..4 {
        let a = apd_direction(&d.all(), t, &mut RngStream::new(8, 3));
        let b = apd_direction(&d.all(), t, &mut RngStream::new(8, 3));
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn apd_equals_normalized_power(
        n in 2usize..=50,
        dim in 1usize..=10,
        t in 0usize..=4,
        seed in any::<u64>(),
    ) {
        let d = random_data(n, dim, seed);
        let dir = apd_direction(&d.all(), t, &mut RngStream::new(seed, 1));
        let want = oracle_covariance_power_apply(&d.all(), &dir.start, t).unwrap();
        prop_assert!(max_abs_diff(&dir.vector, &want) < 1e-8);
    }

    #[test]
    fn zero_iterations_is_random_projection(n in 2usize..30, dim in 1usize..8, seed in any::<u64>()) {
        let d = random_data(n, dim, seed);
        let dir = apd_direction(&d.all(), 0, &mut RngStream::new(seed, 9));
        prop_assert_eq!(dir.vector, random_unit_vector(&mut RngStream::new(seed, 9), dim));
    }

    #[test]
    fn variance_is_monotone_in_iterations(n in 3usize..40, dim in 1usize..8, seed in any::<u64>()) {
        let d = random_data(n, dim, seed);
        let mut last = 0.0f64;
        for t in 0..6 {
            let dir = apd_direction(&d.all(), t, &mut RngStream::new(seed, 2));
            let v = directional_variance(&d.all(), &dir.vector).unwrap();
            prop_assert!(v >= last - 1e-10 * last.max(1.0));
            last = v;
        }
    }
}
