mod common;

use apd_core::{
    avg_diameter_sq, avg_diameter_sq_pair, directional_variance, heuristic_diameter_sq, subset_mean,
    Dataset, PointSubset, RngStream,
};
use apd_oracles::{
    oracle_avg_diameter_sq, oracle_eigendecomposition, oracle_max_diameter_sq, oracle_mean,
};
use common::{random_data, rel_err};
use proptest::prelude::*;

#[test]
fn mean_matches_naive_columns() {
    let d = random_data(50, 8, 1);
    let got = subset_mean(&d.all());
    let want = oracle_mean(&d.all());
    for (g, w) in got.iter().zip(&want) {
        assert!(rel_err(*g, *w) < 1e-12, "{g} vs {w}");
    }
}

#[test]
fn avg_diameter_matches_pairwise_form() {
    let d = random_data(100, 10, 2);
    let got = avg_diameter_sq(&d.all());
    let want = oracle_avg_diameter_sq(&d.all());
    assert!(rel_err(got, want) < 1e-9, "{got} vs {want}");
}

#[test]
fn pair_diameter_on_random_split() {
    let d = random_data(60, 5, 3);
    let mut rng = RngStream::new(3, 3);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in 0..d.n() {
        if rng.uniform() < 0.4 { a.push(i) } else { b.push(i) }
    }
    let s1 = PointSubset::new(&d, &a).unwrap();
    let s2 = PointSubset::new(&d, &b).unwrap();
    let d1 = oracle_avg_diameter_sq(&s1);
    let d2 = oracle_avg_diameter_sq(&s2);
    let want = (d1 * a.len() as f64 + d2 * b.len() as f64) / d.n() as f64;
    assert!(rel_err(avg_diameter_sq_pair(&s1, &s2), want) < 1e-12);
}

#[test]
fn heuristic_sandwich_on_random_sets() {
    for seed in 0..100 {
        let d = random_data(30 + (seed as usize % 20), 1 + seed as usize % 7, seed);
        let h = heuristic_diameter_sq(&d.all());
        let exact = oracle_max_diameter_sq(&d.all());
        let slack = 1e-12 * exact;
        assert!(h <= exact + slack && exact <= 4.0 * h + slack, "seed {seed}: D^2={h}, Δ^2={exact}");
    }
}

#[test]
fn heuristic_uses_first_point_in_index_order() {
    let d = Dataset::from_rows(&[vec![0.0], vec![10.0], vec![4.0]]).unwrap();
    let idx = [2, 0, 1];
    // Anchor is row 2 (first listed), farthest point is row 1 at distance 6.
    assert_eq!(heuristic_diameter_sq(&PointSubset::new(&d, &idx).unwrap()), 36.0);
}

#[test]
fn directional_variance_matches_eigen_expansion() {
    let d = random_data(40, 6, 4);
    let eig = oracle_eigendecomposition(&d.all());
    let n = d.n() as f64;
    let mut rng = RngStream::new(4, 4);
    for _ in 0..50 {
        let q = rng.unit_vector(6);
        let alpha = eig.coefficients(&q);
        let want: f64 = eig.values.iter().zip(&alpha).map(|(l, a)| l * a * a).sum::<f64>() / n;
        let got = directional_variance(&d.all(), &q).unwrap();
        assert!(rel_err(got, want) < 1e-8, "{got} vs {want}");
        assert!(got <= eig.values[0] / n * (1.0 + 1e-12));
    }
}

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (2usize..25, 1usize..6).prop_flat_map(|(n, dim)| {
        prop::collection::vec(-50.0f64..50.0, n * dim).prop_map(move |v| Dataset::new(n, dim, v).unwrap())
    })
}

fn shifted(d: &Dataset, shift: &[f64], scale: f64) -> Dataset {
    let dim = d.dim();
    let v = d.values().iter().enumerate().map(|(k, x)| scale * x + shift[k % dim]).collect();
    Dataset::new(d.n(), dim, v).unwrap()
}

fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(scale)
}

proptest! {
    #[test]
    fn diameter_forms_agree(d in dataset_strategy()) {
        let got = avg_diameter_sq(&d.all());
        let want = oracle_avg_diameter_sq(&d.all());
        prop_assert!(close(got, want, 1e-9, 1e-12), "{} vs {}", got, want);
    }

    #[test]
    fn translation_invariance(d in dataset_strategy(), t in prop::collection::vec(-1e3f64..1e3, 6)) {
        let moved = shifted(&d, &t[..d.dim()], 1.0);
        let p = RngStream::new(1, 1).unit_vector(d.dim());
        let floor = 1e-12;
        prop_assert!(close(avg_diameter_sq(&d.all()), avg_diameter_sq(&moved.all()), 1e-9, floor));
        prop_assert!(close(heuristic_diameter_sq(&d.all()), heuristic_diameter_sq(&moved.all()), 1e-9, floor));
        prop_assert!(close(
            directional_variance(&d.all(), &p).unwrap(),
            directional_variance(&moved.all(), &p).unwrap(),
            1e-9,
            floor,
        ));
    }

    #[test]
    fn scale_covariance(d in dataset_strategy(), alpha in 0.01f64..100.0) {
        let zero = vec![0.0; d.dim()];
        let scaled = shifted(&d, &zero, alpha);
        let p = RngStream::new(2, 2).unit_vector(d.dim());
        let a2 = alpha * alpha;
        prop_assert!(close(avg_diameter_sq(&scaled.all()), a2 * avg_diameter_sq(&d.all()), 1e-9, 1e-12));
        prop_assert!(close(heuristic_diameter_sq(&scaled.all()), a2 * heuristic_diameter_sq(&d.all()), 1e-9, 1e-12));
        prop_assert!(close(
            directional_variance(&scaled.all(), &p).unwrap(),
            a2 * directional_variance(&d.all(), &p).unwrap(),
            1e-9,
            1e-12,
        ));
    }

    #[test]
    fn heuristic_sandwich(d in dataset_strategy()) {
        let h = heuristic_diameter_sq(&d.all());
        let exact = oracle_max_diameter_sq(&d.all());
        // Summation order differs from the oracle's; allow rounding only.
        let slack = 1e-12 * exact;
        prop_assert!(exact / 4.0 <= h + slack && h <= exact + slack);
    }
}
