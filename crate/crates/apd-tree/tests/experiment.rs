use apd_core::{gen_synthetic, SplitRule, SyntheticSpec};
use apd_tree::experiment::{run_bench, run_experiment, BenchConfig, ExperimentConfig, EVAL_HEADER};

fn data() -> apd_core::Dataset {
    gen_synthetic(&SyntheticSpec { n: 300, dim: 16, seed: 8 }).unwrap()
}

#[test]
fn rows_are_sorted_and_complete() {
    let rules = vec![SplitRule::pca(), SplitRule::Apd { iterations: 2 }, SplitRule::Rp, SplitRule::Apd { iterations: 1 }];
    let cfg = ExperimentConfig { timing: false, ..ExperimentConfig::new(rules, vec![3, 1, 2], 4, 1) };
    let report = run_experiment(&data(), &cfg).unwrap();
    let keys: Vec<(&str, u32, u32, usize)> =
        report.rows.iter().map(|r| (r.rule.name(), r.t(), r.depth, r.runs)).collect();
    let mut want = Vec::new();
    for (name, t, runs) in [("rp", 0, 4), ("apd", 1, 4), ("apd", 2, 4), ("pca", 0, 1)] {
        for depth in 1..=3 {
            want.push((name, t, depth, runs));
        }
    }
    assert_eq!(keys, want);
    assert!(report.rows.iter().all(|r| r.build_ms_mean.is_none()));
    assert!(report.rows.iter().filter(|r| r.rule.name() == "pca").all(|r| r.vq_std == 0.0));
    assert!(report.warnings.is_empty());
}

#[test]
fn single_run_is_reproducible() {
    let cfg = ExperimentConfig { timing: false, ..ExperimentConfig::new(vec![SplitRule::Apd { iterations: 1 }], vec![4], 1, 42) };
    let a = run_experiment(&data(), &cfg).unwrap().to_csv();
    let b = run_experiment(&data(), &cfg).unwrap().to_csv();
    assert_eq!(a, b);
    assert!(a.starts_with(EVAL_HEADER));
    assert!(a.ends_with(",1,\n"), "{a}");
}

#[test]
fn vq_agrees_with_a_direct_build() {
    let d = data();
    let cfg = ExperimentConfig { timing: false, ..ExperimentConfig::new(vec![SplitRule::Rp], vec![2, 5], 2, 9) };
    let report = run_experiment(&d, &cfg).unwrap();
    let mut want = 0.0;
    for run in 0..2 {
        let seed = apd_core::rng::derive_seed(9, run);
        let tree = apd_core::build_tree(&d, &apd_core::TreeConfig::new(SplitRule::Rp, 5, seed)).unwrap();
        want += apd_core::vq_error(&tree, &d, 2).unwrap() / 2.0;
    }
    let got = report.find(SplitRule::Rp, 2).unwrap().vq_mean;
    assert!((got - want).abs() <= 1e-12 * want);
}

#[test]
fn csv_values_round_trip() {
    let cfg = ExperimentConfig::new(vec![SplitRule::Rp, SplitRule::pca()], vec![1, 2], 3, 4);
    let report = run_experiment(&data(), &cfg).unwrap();
    let csv = report.to_csv();
    assert!(!csv.contains('\r'));
    for (line, row) in csv.lines().skip(1).zip(&report.rows) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 7);
        assert_eq!(f[3].parse::<f64>().unwrap().to_bits(), row.vq_mean.to_bits());
        assert_eq!(f[4].parse::<f64>().unwrap().to_bits(), row.vq_std.to_bits());
        let ms: f64 = f[6].parse().unwrap();
        assert!(ms >= 0.0 && ms == row.build_ms_mean.unwrap());
    }
}

#[test]
fn deep_requests_are_clamped() {
    let small = gen_synthetic(&SyntheticSpec { n: 10, dim: 3, seed: 1 }).unwrap();
    let cfg = ExperimentConfig { timing: false, ..ExperimentConfig::new(vec![SplitRule::Rp], vec![2, 9, 30], 2, 0) };
    let report = run_experiment(&small, &cfg).unwrap();
    let depths: Vec<u32> = report.rows.iter().map(|r| r.depth).collect();
    assert_eq!(depths, vec![2, 4]);
    assert_eq!(report.rows[1].vq_mean, 0.0);
    assert_eq!(report.warnings.len(), 1);
}

#[test]
fn bad_parameters_are_rejected() {
    let d = data();
    assert!(run_experiment(&d, &ExperimentConfig::new(vec![SplitRule::Rp], vec![1], 0, 0)).is_err());
    assert!(run_experiment(&d, &ExperimentConfig::new(vec![], vec![1], 1, 0)).is_err());
    assert!(run_bench(&d, &BenchConfig::new(2, 0, 0)).is_err());
}

#[test]
fn bench_reports_every_rule() {
    let cfg = BenchConfig { max_t: 2, ..BenchConfig::new(3, 2, 0) };
    let report = run_bench(&data(), &cfg).unwrap();
    let names: Vec<(&str, u32)> = report.rows.iter().map(|r| (r.rule.name(), r.rule.iterations())).collect();
    assert_eq!(names, vec![("apd", 0), ("apd", 1), ("apd", 2), ("pca", 0)]);
    for r in &report.rows {
        assert_eq!(r.samples.len(), 2);
        assert!(r.min_ms <= r.mean_ms && r.min_ms > 0.0);
    }
    let csv = report.to_csv();
    assert!(csv.starts_with("rule,t,build_ms_mean,build_ms_min\napd,0,"));
}
