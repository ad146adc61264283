//! Command-line front end: `estimate`, `citest`, `benchmark`, `generate`.
//!
//! Every verb prints one JSON object on standard output; progress goes to
//! standard error. Exit codes: 0 on success, 2 for usage and data errors,
//! 3 for numerical failures.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::bench::{self, BenchmarkConfig, Task, WORKERS_ENV};
use crate::citest::{ci_test, CITestConfig};
use crate::data::ColumnMoments;
use crate::datagen::{generate, Bijection, ScenarioConfig, ZFamily};
use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorConfig};
use crate::flow::TrainConfig;
use crate::io::{read_dataset, write_dataset, ColumnSpec};

#[derive(Debug, Parser)]
#[command(name = "dine", version, about = "Flow-based (conditional) mutual information estimation and CI testing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate I(X; Y | Z), or I(X; Y) when no z columns are present.
    Estimate(EstimateArgs),
    /// Permutation test of X ⫫ Y | Z.
    Citest(CitestArgs),
    /// Run a synthetic benchmark grid and write per-run records.
    Benchmark(BenchmarkArgs),
    /// Write one synthetic scenario as CSV plus a metadata sidecar.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated x column names (default: x0, x1, ...).
    #[arg(long)]
    pub x_cols: Option<String>,
    /// Comma-separated y column names (default: y0, y1, ...).
    #[arg(long)]
    pub y_cols: Option<String>,
    /// Comma-separated z column names (default: z0, z1, ...).
    #[arg(long)]
    pub z_cols: Option<String>,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long, default_value_t = 16)]
    pub n_components: usize,
    #[arg(long, default_value_t = 4)]
    pub hidden_dim: usize,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl FlowArgs {
    fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            n_components: self.n_components,
            hidden_dim: self.hidden_dim,
            train: TrainConfig {
                epochs: self.epochs,
                batch_size: self.batch_size,
                learning_rate: self.lr,
                seed: self.seed,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub flow: FlowArgs,
}

#[derive(Debug, Args)]
pub struct CitestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub flow: FlowArgs,
    /// Number of permutations B.
    #[arg(long, default_value_t = 100)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// One of mi, cmi, cit.
    #[arg(long)]
    pub task: String,
    /// Sample sizes, comma-separated.
    #[arg(long, default_value = "1000", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Shared dimensions d_X = d_Y, comma-separated.
    #[arg(long, default_value = "1", value_delimiter = ',')]
    pub d: Vec<usize>,
    /// Conditioning dimensions, comma-separated (ignored for mi).
    #[arg(long, default_value = "1", value_delimiter = ',')]
    pub d_z: Vec<usize>,
    /// Correlations, comma-separated (ignored for cit).
    #[arg(long, default_value = "0", value_delimiter = ',', allow_hyphen_values = true)]
    pub rho: Vec<f64>,
    /// Runs per cell (per label for cit).
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// Worker threads.
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// Records CSV; summaries and timings go to sidecars next to it.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub flow: FlowArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub d_z: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rho: f64,
    /// Bijection for x (linear, cube, neg_exp, reciprocal, log, sigmoid);
    /// drawn from the seed when omitted.
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    /// uniform, normal or laplace; drawn from the seed when omitted.
    #[arg(long)]
    pub z_family: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset CSV; metadata goes to `<stem>.meta` next to it.
    #[arg(long)]
    pub output: PathBuf,
}

/// Parses the process arguments, runs the verb and returns the exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(value) => {
            println!("{value}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<Value> {
    match command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Citest(a) => cmd_citest(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

fn load(input: &InputArgs) -> Result<crate::data::Dataset> {
    let spec = ColumnSpec::from_lists(input.x_cols.as_deref(), input.y_cols.as_deref(), input.z_cols.as_deref());
    read_dataset(&input.input, &spec)
}

fn moments_json(m: &[ColumnMoments]) -> Value {
    Value::Array(m.iter().map(|c| json!({"mean": c.mean, "variance": c.variance})).collect())
}

fn dims_json((x, y, z): (usize, usize, usize)) -> Value {
    json!({"x": x, "y": y, "z": z})
}

pub fn cmd_estimate(a: &EstimateArgs) -> Result<Value> {
    let data = load(&a.input)?;
    let r = estimate(&data, &a.flow.estimator())?;
    Ok(json!({
        "estimate": r.value,
        "n": r.n,
        "dims": dims_json(r.dims),
        "diagnostics": {
            "x": moments_json(&r.surrogate_diagnostics.x),
            "y": moments_json(&r.surrogate_diagnostics.y),
            "final_loss": r.loss_trace.last(),
        },
        "seed": r.seed,
    }))
}

pub fn cmd_citest(a: &CitestArgs) -> Result<Value> {
    let data = load(&a.input)?;
    let cfg = CITestConfig {
        n_permutations: a.permutations,
        alpha: a.alpha,
        seed: a.flow.seed,
        estimator: a.flow.estimator(),
    };
    let r = ci_test(&data, &cfg)?;
    Ok(json!({
        "statistic": r.statistic,
        "p_value": r.p_value,
        "decision": r.decision,
        "n": data.n(),
        "dims": dims_json(data.dims()),
        "permutations": a.permutations,
        "alpha": a.alpha,
        "seed": a.flow.seed,
    }))
}

fn check_writable(path: &Path) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !dir.is_dir() {
        return Err(Error::Data(format!("output directory {} does not exist", dir.display())));
    }
    Ok(())
}

pub fn cmd_benchmark(a: &BenchmarkArgs) -> Result<Value> {
    let task: Task = a.task.parse()?;
    check_writable(&a.output)?;
    let mut cfg = BenchmarkConfig::new(task);
    cfg.ns = a.n.clone();
    cfg.ds = a.d.clone();
    cfg.d_zs = a.d_z.clone();
    cfg.rhos = a.rho.clone();
    cfg.runs = a.runs;
    cfg.seed = a.flow.seed;
    cfg.workers = a.workers.unwrap_or_else(bench::default_workers);
    cfg.estimator = a.flow.estimator();
    cfg.n_permutations = a.permutations;
    cfg.alpha = a.alpha;
    let out = bench::run_benchmark_with_progress(&cfg, |done, total| {
        if done % 10 == 0 || done == total {
            eprintln!("benchmark: {done}/{total} runs");
        }
    })?;
    // check the records file first so an unwritable path fails before sidecars
    bench::write_records(&a.output, &out.records).map_err(|e| Error::Data(format!("cannot write {}: {e}", a.output.display())))?;
    let timing = bench::sidecar_path(&a.output, "timing");
    bench::write_timing(&timing, &out.records, &out.wall_times)?;
    let summary_path = bench::sidecar_path(&a.output, "summary");
    let summary = if task == Task::Cit {
        let metrics = bench::cit_metrics(&out.records, a.alpha)?;
        bench::write_metrics(&summary_path, &metrics, &out.records)?;
        serde_json::to_value(metrics.iter().map(|(k, m)| json!({"cell": k, "metrics": m})).collect::<Vec<_>>())
    } else {
        let cells = bench::summarize_cells(&out.records);
        bench::write_cell_summaries(&summary_path, &cells)?;
        serde_json::to_value(&cells)
    }
    .map_err(|e| Error::Data(e.to_string()))?;
    Ok(json!({
        "task": task,
        "records": out.records.len(),
        "output": a.output,
        "summary_path": summary_path,
        "timing_path": timing,
        "summary": summary,
        "seed": cfg.seed,
    }))
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<Value> {
    check_writable(&a.output)?;
    let mut cfg = ScenarioConfig::sampled(a.n, a.d, a.d_z, a.rho, a.seed);
    if let Some(f) = &a.f {
        cfg.f = f.parse::<Bijection>()?;
    }
    if let Some(g) = &a.g {
        cfg.g = g.parse::<Bijection>()?;
    }
    if let Some(z) = &a.z_family {
        cfg.z_family = z.parse::<ZFamily>()?;
    }
    let scenario = generate(&cfg)?;
    write_dataset(&a.output, &scenario.dataset)?;
    let stem = a.output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let meta_path = a.output.with_file_name(format!("{stem}.meta"));
    std::fs::write(&meta_path, scenario.metadata())?;
    Ok(json!({
        "output": a.output,
        "metadata_path": meta_path,
        "config": cfg,
        "ground_truth_cmi": scenario.ground_truth_cmi,
        "clip_events": scenario.clip_events,
    }))
}
