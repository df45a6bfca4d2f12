//! Command-line interface. `main.rs` only parses arguments and maps the
//! outcome to an exit status; everything else lives here so tests can drive
//! commands in-process.

use std::fs::{self, File};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use apd_core::{build_tree, gen_synthetic, Dataset, SplitRule, SyntheticSpec, TreeConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::delimited::{load_delimited, DelimitedOptions};
use crate::error::{AppError, Result};
use crate::experiment::{run_bench, run_experiment, BenchConfig, ExperimentConfig};
use crate::idx::{load_idx_images, IDX3_MAGIC};
use crate::native::{load_dataset, save_dataset, DATASET_MAGIC};
use crate::tree_format::save_tree;

#[derive(Debug, Parser)]
#[command(name = "apd-tree", version, about = "Build and evaluate RP, APD and PCA partition trees")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "APD_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the synthetic dataset (per point: peak p ~ U[0,1], coordinates ~ N(p, 1)).
    Gen(GenArgs),
    /// Build one tree and write it to a file.
    Build(BuildArgs),
    /// VQ-error sweep over rules and depths; CSV output.
    Eval(EvalArgs),
    /// Time tree builds for APD t = 0..=max-t and PCA; CSV output.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Detect from the file's first bytes.
    Auto,
    Native,
    Idx,
    Text,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Dataset file: native, IDX3 images, or delimited text.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// Field delimiter for text input (default: whitespace).
    #[arg(long)]
    pub delimiter: Option<char>,
    /// 0-based text columns to drop, e.g. `0,1,2`.
    #[arg(long, value_delimiter = ',')]
    pub skip_columns: Vec<usize>,
    /// Scale IDX pixels from [0, 255] to [0, 1].
    #[arg(long)]
    pub unit_scale: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleKind {
    Rp,
    Apd,
    Pca,
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Outlier constant c: a node gets a sphere split when D^2 > c * mean squared diameter.
    #[arg(long, default_value_t = apd_core::tree::DEFAULT_OUTLIER_C)]
    pub outlier_c: f64,
    #[arg(long, default_value_t = apd_core::tree::DEFAULT_MIN_LEAF_SIZE)]
    pub min_leaf_size: usize,
    /// Relative convergence threshold of the PCA rule.
    #[arg(long, default_value_t = apd_core::split::DEFAULT_PCA_TOLERANCE)]
    pub pca_tol: f64,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub rule: RuleKind,
    /// Power iterations (APD only).
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long)]
    pub depth: u32,
    #[command(flatten)]
    pub tree: TreeArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [RuleKind::Rp, RuleKind::Apd, RuleKind::Pca])]
    pub rules: Vec<RuleKind>,
    /// APD iteration counts (default 1).
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<u32>,
    /// Depths: `4`, `1,2,6` or inclusive ranges like `1..10`.
    #[arg(long, default_value = "1..10")]
    pub depths: String,
    #[arg(long, default_value_t = 15)]
    pub runs: usize,
    #[command(flatten)]
    pub tree: TreeArgs,
    /// Leave `build_ms_mean` empty so output is reproducible byte for byte.
    #[arg(long)]
    pub no_timing: bool,
    /// CSV destination (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 4)]
    pub depth: u32,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 4)]
    pub max_t: u32,
    #[arg(long)]
    pub no_pca: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = apd_core::tree::DEFAULT_OUTLIER_C)]
    pub outlier_c: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

/// Parses `4`, `1,3,5`, `1..10` (inclusive) and mixtures such as `1..3,8`.
pub fn parse_depths(spec: &str) -> Result<Vec<u32>> {
    let bad = || usage(format!("invalid depth list {spec:?}; use e.g. 4, 1,2,6 or 1..10"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn load_input(input: &InputArgs) -> Result<Dataset> {
    let path = input.data.as_path();
    let format = match input.format {
        InputFormat::Auto => sniff(path)?,
        f => f,
    };
    if format != InputFormat::Text && (input.delimiter.is_some() || !input.skip_columns.is_empty()) {
        return Err(usage("--delimiter and --skip-columns apply to text input only"));
    }
    if format != InputFormat::Idx && input.unit_scale {
        return Err(usage("--unit-scale applies to IDX input only"));
    }
    match format {
        InputFormat::Native => load_dataset(path),
        InputFormat::Idx => load_idx_images(path, input.unit_scale),
        _ => load_delimited(
            path,
            &DelimitedOptions { delimiter: input.delimiter, skip_columns: input.skip_columns.clone() },
        ),
    }
}

fn sniff(path: &Path) -> Result<InputFormat> {
    let mut head = [0u8; 4];
    let mut f = File::open(path).map_err(|e| AppError::io(path, e))?;
    let got = f.read(&mut head).map_err(|e| AppError::io(path, e))?;
    Ok(if got == 4 && head == DATASET_MAGIC {
        InputFormat::Native
    } else if got == 4 && u32::from_be_bytes(head) == IDX3_MAGIC {
        InputFormat::Idx
    } else {
        InputFormat::Text
    })
}

fn resolve_rule(kind: RuleKind, t: Option<u32>, pca_tol: f64) -> Result<SplitRule> {
    Ok(match (kind, t) {
        (RuleKind::Rp, None) => SplitRule::Rp,
        (RuleKind::Apd, t) => SplitRule::Apd { iterations: t.unwrap_or(1) },
        (RuleKind::Pca, None) => SplitRule::Pca { tolerance: pca_tol },
        (RuleKind::Rp, Some(_)) => {
            return Err(usage("--t does not apply to --rule rp (rp is apd with t = 0)"));
        }
        (RuleKind::Pca, Some(_)) => {
            return Err(usage("--t does not apply to --rule pca, which iterates to convergence"));
        }
    })
}

fn write_output(out: &Option<PathBuf>, text: &str, stdout: &mut (dyn Write + Send)) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| AppError::io(path, e)),
        None => stdout.write_all(text.as_bytes()).map_err(AppError::Output),
    }
}

fn thread_count() -> usize {
    rayon::current_num_threads()
}

pub fn run(cli: Cli, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<()> {
    let pool = match cli.threads {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| usage(format!("cannot start {n} threads: {e}")))?,
        ),
        None => None,
    };
    match pool {
        Some(pool) => pool.install(|| dispatch(cli.command, stdout, stderr)),
        None => dispatch(cli.command, stdout, stderr),
    }
}

fn dispatch(command: Command, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<()> {
    match command {
        Command::Gen(a) => cmd_gen(a, stdout, stderr),
        Command::Build(a) => cmd_build(a, stdout, stderr),
        Command::Eval(a) => cmd_eval(a, stdout, stderr),
        Command::Bench(a) => cmd_bench(a, stdout, stderr),
    }
}

// Diagnostics are best effort; a closed stderr must not fail a command.
macro_rules! note {
    ($w:expr, $($arg:tt)*) => {
        let _ = writeln!($w, $($arg)*);
    };
}

pub fn cmd_gen(a: GenArgs, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<()> {
    if a.n == 0 || a.dim == 0 {
        return Err(usage("--n and --dim must be at least 1"));
    }
    note!(stderr, "gen: n={} dim={} seed={} out={}", a.n, a.dim, a.seed, a.out.display());
    let data = gen_synthetic(&SyntheticSpec { n: a.n, dim: a.dim, seed: a.seed })?;
    save_dataset(&a.out, &data)?;
    writeln!(stdout, "n={} dim={} seed={}", data.n(), data.dim(), a.seed).map_err(AppError::Output)
}

pub fn cmd_build(a: BuildArgs, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<()> {
    let rule = resolve_rule(a.rule, a.t, a.tree.pca_tol)?;
    let cfg = TreeConfig {
        min_leaf_size: a.tree.min_leaf_size,
        outlier_c: a.tree.outlier_c,
        ..TreeConfig::new(rule, a.depth, a.tree.seed)
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let data = load_input(&a.input)?;
    note!(
        stderr,
        "build: data={} n={} dim={} rule={rule} depth={} seed={} outlier_c={} min_leaf_size={} threads={}",
        a.input.data.display(),
        data.n(),
        data.dim(),
        cfg.max_depth,
        cfg.master_seed,
        cfg.outlier_c,
        cfg.min_leaf_size,
        thread_count()
    );
    let start = Instant::now();
    let tree = build_tree(&data, &cfg)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    save_tree(&a.out, &tree)?;
    writeln!(
        stdout,
        "nodes={} leaves={} depth={} build_ms={ms:.3}",
        tree.node_count(),
        tree.leaf_count(),
        tree.depth()
    )
    .map_err(AppError::Output)
}

pub fn cmd_eval(a: EvalArgs, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<()> {
    if a.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    let depths = parse_depths(&a.depths)?;
    let has_apd = a.rules.contains(&RuleKind::Apd);
    if !a.t.is_empty() && !has_apd {
        return Err(usage("--t needs apd among --rules"));
    }
    let ts = if a.t.is_empty() { vec![1] } else { a.t.clone() };
    let mut rules = Vec::new();
    for kind in &a.rules {
        match kind {
            RuleKind::Apd => rules.extend(ts.iter().map(|&t| SplitRule::Apd { iterations: t })),
            &k => rules.push(resolve_rule(k, None, a.tree.pca_tol)?),
        }
    }
    let data = load_input(&a.input)?;
    let cfg = ExperimentConfig {
        outlier_c: a.tree.outlier_c,
        min_leaf_size: a.tree.min_leaf_size,
        timing: !a.no_timing,
        ..ExperimentConfig::new(rules, depths, a.runs, a.tree.seed)
    };
    TreeConfig { min_leaf_size: cfg.min_leaf_size, outlier_c: cfg.outlier_c, ..TreeConfig::new(SplitRule::Rp, 0, 0) }
        .validate()
        .map_err(|e| usage(e.to_string()))?;
    let names: Vec<String> = cfg.rules.iter().map(ToString::to_string).collect();
    note!(
        stderr,
        "eval: data={} n={} dim={} rules={} depths={:?} runs={} seed={} outlier_c={} min_leaf_size={} timing={} threads={}",
        a.input.data.display(),
        data.n(),
        data.dim(),
        names.join(","),
        cfg.depths,
        cfg.runs,
        cfg.seed,
        cfg.outlier_c,
        cfg.min_leaf_size,
        cfg.timing,
        thread_count()
    );
    let report = run_experiment(&data, &cfg)?;
    for w in &report.warnings {
        note!(stderr, "warning: {w}");
    }
    write_output(&a.out, &report.to_csv(), stdout)
}

pub fn cmd_bench(a: BenchArgs, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<()> {
    if a.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    let cfg = BenchConfig {
        max_t: a.max_t,
        include_pca: !a.no_pca,
        outlier_c: a.outlier_c,
        ..BenchConfig::new(a.depth, a.reps, a.seed)
    };
    TreeConfig { outlier_c: cfg.outlier_c, ..TreeConfig::new(SplitRule::Rp, cfg.depth, cfg.seed) }
        .validate()
        .map_err(|e| usage(e.to_string()))?;
    let data = load_input(&a.input)?;
    note!(
        stderr,
        "bench: data={} n={} dim={} depth={} reps={} max_t={} pca={} seed={} outlier_c={} threads={}",
        a.input.data.display(),
        data.n(),
        data.dim(),
        cfg.depth,
        cfg.reps,
        cfg.max_t,
        cfg.include_pca,
        cfg.seed,
        cfg.outlier_c,
        thread_count()
    );
    let report = run_bench(&data, &cfg)?;
    write_output(&a.out, &report.to_csv(), stdout)
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit status. Errors are reported on `stderr`.
pub fn main_with<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let _ = stderr.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match run(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

