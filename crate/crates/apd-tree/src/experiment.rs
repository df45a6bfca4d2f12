//! VQ-error sweeps and build-time benchmarks.

use std::fmt::Write as _;
use std::time::Instant;

use apd_core::rng::derive_seed;
use apd_core::tree::MAX_DEPTH;
use apd_core::{build_tree, build_tree_with_observer, vq_error, Dataset, SplitRule, TreeConfig};
use rayon::prelude::*;

use crate::error::{AppError, Result};

pub const EVAL_HEADER: &str = "rule,t,depth,vq_mean,vq_std,runs,build_ms_mean";
pub const BENCH_HEADER: &str = "rule,t,build_ms_mean,build_ms_min";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub rules: Vec<SplitRule>,
    pub depths: Vec<u32>,
    pub runs: usize,
    pub seed: u64,
    pub outlier_c: f64,
    pub min_leaf_size: usize,
    /// Record wall-clock build times. Off, the `build_ms_mean` column is
    /// left empty and the report is a pure function of the inputs.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(rules: Vec<SplitRule>, depths: Vec<u32>, runs: usize, seed: u64) -> Self {
        ExperimentConfig {
            rules,
            depths,
            runs,
            seed,
            outlier_c: apd_core::tree::DEFAULT_OUTLIER_C,
            min_leaf_size: apd_core::tree::DEFAULT_MIN_LEAF_SIZE,
            timing: true,
        }
    }

    fn tree_config(&self, rule: SplitRule, max_depth: u32, seed: u64) -> TreeConfig {
        TreeConfig { min_leaf_size: self.min_leaf_size, outlier_c: self.outlier_c, ..TreeConfig::new(rule, max_depth, seed) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub rule: SplitRule,
    pub depth: u32,
    pub vq_mean: f64,
    /// Sample standard deviation over runs; 0 for a single run.
    pub vq_std: f64,
    pub runs: usize,
    pub build_ms_mean: Option<f64>,
}

impl EvalRow {
    pub fn t(&self) -> u32 {
        self.rule.iterations()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    /// Non-fatal adjustments, e.g. clamped depths.
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(EVAL_HEADER);
        out.push('\n');
        for r in &self.rows {
            let ms = r.build_ms_mean.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{},{},{}", r.rule.name(), r.t(), r.depth, r.vq_mean, r.vq_std, r.runs, ms);
        }
        out
    }

    /// Row for a rule at a depth.
    pub fn find(&self, rule: SplitRule, depth: u32) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.rule == rule && r.depth == depth)
    }
}

/// Deepest level with anything left to split: `ceil(log2 n)`.
pub fn max_useful_depth(n: usize) -> u32 {
    let d = usize::BITS - n.saturating_sub(1).leading_zeros();
    d.min(MAX_DEPTH)
}

fn rule_rank(rule: &SplitRule) -> u8 {
    match rule {
        SplitRule::Rp => 0,
        SplitRule::Apd { .. } => 1,
        SplitRule::Pca { .. } => 2,
    }
}

pub fn sort_rules(rules: &mut Vec<SplitRule>) {
    rules.sort_by(|a, b| (rule_rank(a), a.iterations()).cmp(&(rule_rank(b), b.iterations())));
    rules.dedup_by(|a, b| rule_rank(a) == rule_rank(b) && a.iterations() == b.iterations());
}

struct RunResult {
    vq: Vec<f64>,
    ms: Vec<f64>,
}

fn one_run(data: &Dataset, cfg: &ExperimentConfig, rule: SplitRule, depths: &[u32], seed: u64) -> Result<RunResult> {
    let max_depth = *depths.last().unwrap();
    let tcfg = cfg.tree_config(rule, max_depth, seed);
    let mut level_ms = Vec::new();
    let tree = if cfg.timing {
        let start = Instant::now();
        build_tree_with_observer(data, &tcfg, |_| level_ms.push(start.elapsed().as_secs_f64() * 1e3))?
    } else {
        build_tree(data, &tcfg)?
    };
    let vq = depths.iter().map(|&d| vq_error(&tree, data, d)).collect::<apd_core::Result<Vec<_>>>()?;
    // A tree that ran out of points early is complete at its last level.
    let ms = depths.iter().filter_map(|&d| level_ms.get(d as usize).or(level_ms.last()).copied()).collect();
    Ok(RunResult { vq, ms })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Builds `runs` trees per randomized rule (one for PCA) and reports VQ
/// error at each depth, cutting each tree rather than rebuilding it.
///
/// Run `r` of every randomized rule uses seed `derive_seed(seed, r)`, so RP
/// and APD runs are paired on the same random start vectors.
pub fn run_experiment(data: &Dataset, cfg: &ExperimentConfig) -> Result<EvalReport> {
    if cfg.runs == 0 {
        return Err(AppError::Usage("runs must be at least 1".into()));
    }
    if cfg.rules.is_empty() || cfg.depths.is_empty() {
        return Err(AppError::Usage("need at least one rule and one depth".into()));
    }
    for rule in &cfg.rules {
        rule.validate()?;
    }
    let mut warnings = Vec::new();
    let cap = max_useful_depth(data.n());
    let mut depths: Vec<u32> = cfg.depths.iter().map(|&d| d.min(cap)).collect();
    if cfg.depths.iter().any(|&d| d > cap) {
        warnings.push(format!("depths above {cap} clamped to {cap}: {} points cannot be split further", data.n()));
    }
    depths.sort_unstable();
    depths.dedup();
    let mut rules = cfg.rules.clone();
    sort_rules(&mut rules);

    let jobs: Vec<(SplitRule, u64)> = rules
        .iter()
        .flat_map(|&rule| {
            let runs = if rule.is_randomized() { cfg.runs } else { 1 };
            (0..runs as u64).map(move |r| (rule, derive_seed(cfg.seed, r)))
        })
        .collect();
    let results: Vec<Result<RunResult>> = if cfg.timing {
        // Untimed warmup, then one build at a time so timings do not contend.
        one_run(data, cfg, jobs[0].0, &depths, jobs[0].1)?;
        jobs.iter().map(|&(rule, seed)| one_run(data, cfg, rule, &depths, seed)).collect()
    } else {
        jobs.par_iter().map(|&(rule, seed)| one_run(data, cfg, rule, &depths, seed)).collect()
    };

    let mut rows = Vec::new();
    let mut results = results.into_iter();
    for &rule in &rules {
        let runs = if rule.is_randomized() { cfg.runs } else { 1 };
        let batch = results.by_ref().take(runs).collect::<Result<Vec<_>>>()?;
        for (k, &depth) in depths.iter().enumerate() {
            let vq: Vec<f64> = batch.iter().map(|r| r.vq[k]).collect();
            let (vq_mean, vq_std) = mean_std(&vq);
            let build_ms_mean = cfg.timing.then(|| mean_std(&batch.iter().map(|r| r.ms[k]).collect::<Vec<_>>()).0);
            rows.push(EvalRow { rule, depth, vq_mean, vq_std, runs, build_ms_mean });
        }
    }
    Ok(EvalReport { rows, warnings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub depth: u32,
    pub reps: usize,
    /// APD is timed for `t = 0..=max_t`.
    pub max_t: u32,
    pub include_pca: bool,
    pub seed: u64,
    pub outlier_c: f64,
}

impl BenchConfig {
    pub fn new(depth: u32, reps: usize, seed: u64) -> Self {
        BenchConfig { depth, reps, max_t: 4, include_pca: true, seed, outlier_c: apd_core::tree::DEFAULT_OUTLIER_C }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub rule: SplitRule,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(BENCH_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.rule.name(), r.rule.iterations(), r.mean_ms, r.min_ms);
        }
        out
    }

    pub fn find(&self, rule: SplitRule) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.rule == rule)
    }
}

/// Wall-clock milliseconds of one tree build.
pub fn time_build(data: &Dataset, cfg: &TreeConfig) -> Result<f64> {
    let start = Instant::now();
    let tree = build_tree(data, cfg)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    drop(tree);
    Ok(ms)
}

/// Times full builds of every rule. Each rule gets one untimed warmup
/// build; repetitions are interleaved across rules so slow drift in machine
/// load spreads evenly.
pub fn run_bench(data: &Dataset, cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.reps == 0 {
        return Err(AppError::Usage("reps must be at least 1".into()));
    }
    let mut rules: Vec<SplitRule> = (0..=cfg.max_t).map(|t| SplitRule::Apd { iterations: t }).collect();
    if cfg.include_pca {
        rules.push(SplitRule::pca());
    }
    let tcfg = |rule, seed| TreeConfig { outlier_c: cfg.outlier_c, ..TreeConfig::new(rule, cfg.depth, seed) };
    for &rule in &rules {
        time_build(data, &tcfg(rule, cfg.seed))?;
    }
    let mut samples = vec![Vec::with_capacity(cfg.reps); rules.len()];
    for rep in 0..cfg.reps as u64 {
        let seed = derive_seed(cfg.seed, rep);
        for (k, &rule) in rules.iter().enumerate() {
            samples[k].push(time_build(data, &tcfg(rule, seed))?);
        }
    }
    let rows = rules
        .into_iter()
        .zip(samples)
        .map(|(rule, s)| BenchRow {
            rule,
            mean_ms: s.iter().sum::<f64>() / s.len() as f64,
            min_ms: s.iter().copied().fold(f64::INFINITY, f64::min),
            samples: s,
        })
        .collect();
    Ok(BenchReport { rows })
}
