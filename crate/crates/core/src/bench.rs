//! Synthetic benchmark grids and CI-test metrics.
//!
//! A benchmark expands a grid into cells, runs every cell `runs` times with
//! per-run seeds derived up front, and returns the records in `(cell, run)`
//! order regardless of scheduling. Wall times are kept apart from the records
//! so that the records file is reproducible byte for byte.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::citest::{ci_test, CITestConfig, Decision};
use crate::datagen::{draw_dependent_rho, generate, Bijection, ScenarioConfig, ZFamily};
use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorConfig};
use crate::io::csv_error;
use crate::seed::derive_seed;

pub const METHOD: &str = "dine";

/// Environment variable read for the default worker count.
pub const WORKERS_ENV: &str = "DINE_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Mutual information, `d_Z = 0`.
    Mi,
    /// Conditional mutual information.
    Cmi,
    /// Conditional-independence testing with both labels per cell.
    Cit,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Mi => "mi",
            Task::Cmi => "cmi",
            Task::Cit => "cit",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mi" => Ok(Task::Mi),
            "cmi" => Ok(Task::Cmi),
            "cit" => Ok(Task::Cit),
            other => Err(Error::Config(format!("unknown task {other:?} (expected mi, cmi or cit)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub task: Task,
    pub ns: Vec<usize>,
    pub ds: Vec<usize>,
    /// Ignored for `Task::Mi`.
    pub d_zs: Vec<usize>,
    /// Ignored for `Task::Cit`, where independent runs use `ρ = 0` and
    /// dependent runs draw `ρ` from their seed.
    pub rhos: Vec<f64>,
    /// Runs per cell; for `Task::Cit`, runs per label.
    pub runs: usize,
    pub seed: u64,
    pub workers: usize,
    pub estimator: EstimatorConfig,
    pub n_permutations: usize,
    pub alpha: f64,
}

impl BenchmarkConfig {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            ns: vec![1000],
            ds: vec![1],
            d_zs: vec![if task == Task::Mi { 0 } else { 1 }],
            rhos: vec![0.0],
            runs: 10,
            seed: 0,
            workers: default_workers(),
            estimator: EstimatorConfig::default(),
            n_permutations: 100,
            alpha: 0.05,
        }
    }

    /// The grid in record order.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        if self.ns.is_empty() || self.ds.is_empty() {
            return Err(Error::Config("benchmark grid is empty".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        let d_zs = match self.task {
            Task::Mi => vec![0],
            _ if self.d_zs.is_empty() => return Err(Error::Config("benchmark grid has no d_z values".into())),
            _ => self.d_zs.clone(),
        };
        let labels: Vec<Label> = match self.task {
            Task::Cit => vec![Label::Independent, Label::Dependent],
            _ if self.rhos.is_empty() => return Err(Error::Config("benchmark grid has no rho values".into())),
            _ => self.rhos.iter().map(|&r| Label::Rho(r)).collect(),
        };
        let mut cells = Vec::new();
        for &n in &self.ns {
            for &d in &self.ds {
                for &d_z in &d_zs {
                    for &label in &labels {
                        cells.push(Cell {
                            index: cells.len(),
                            n,
                            d,
                            d_z,
                            label,
                        });
                    }
                }
            }
        }
        Ok(cells)
    }
}

/// `DINE_WORKERS` if set and positive, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w: &usize| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Label {
    /// Fixed correlation (MI and CMI tasks).
    Rho(f64),
    /// CI test with `ρ = 0`.
    Independent,
    /// CI test with `ρ` drawn uniformly from `[−0.99, −0.1] ∪ [0.1, 0.99]`.
    Dependent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub d: usize,
    pub d_z: usize,
    pub label: Label,
}

impl Cell {
    /// The scenario a run with `seed` uses.
    pub fn scenario(&self, seed: u64) -> ScenarioConfig {
        let rho = match self.label {
            Label::Rho(r) => r,
            Label::Independent => 0.0,
            Label::Dependent => draw_dependent_rho(seed),
        };
        ScenarioConfig::sampled(self.n, self.d, self.d_z, rho, seed)
    }
}

/// One benchmark run. Every field needed to regenerate it is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub task: Task,
    pub cell: usize,
    pub run: usize,
    pub n: usize,
    pub d: usize,
    pub d_z: usize,
    pub rho: f64,
    pub f: Bijection,
    pub g: Bijection,
    pub z_family: ZFamily,
    pub method: String,
    /// `independent` / `dependent` for the CI task, empty otherwise.
    pub label: Option<Decision>,
    /// The MI/CMI estimate, or the CI-test statistic.
    pub estimate: f64,
    pub p_value: Option<f64>,
    pub decision: Option<Decision>,
    pub ground_truth: f64,
    pub seed: u64,
}

/// Column order of the records CSV.
pub const RECORD_COLUMNS: [&str; 17] = [
    "task",
    "cell",
    "run",
    "n",
    "d",
    "d_z",
    "rho",
    "f",
    "g",
    "z_family",
    "method",
    "label",
    "estimate",
    "p_value",
    "decision",
    "ground_truth",
    "seed",
];

/// Fixed settings shared by every run of a benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub task: Task,
    pub estimator: EstimatorConfig,
    pub n_permutations: usize,
    pub alpha: f64,
}

impl From<&BenchmarkConfig> for RunSettings {
    fn from(c: &BenchmarkConfig) -> Self {
        Self {
            task: c.task,
            estimator: c.estimator,
            n_permutations: c.n_permutations,
            alpha: c.alpha,
        }
    }
}

/// Seed of run `run` in cell `cell` under `master`.
pub fn run_seed(master: u64, cell: usize, run: usize) -> u64 {
    derive_seed(derive_seed(master, cell as u64), run as u64)
}

/// Executes a single run; deterministic in `(cell, run, seed, settings)`.
pub fn run_one(cell: &Cell, run: usize, seed: u64, settings: &RunSettings) -> Result<RunRecord> {
    let scenario = cell.scenario(seed);
    let generated = generate(&scenario)?;
    let estimator = settings.estimator.with_seed(seed);
    let (estimate, p_value, decision, label) = match settings.task {
        Task::Mi | Task::Cmi => (estimate(&generated.dataset, &estimator)?.value, None, None, None),
        Task::Cit => {
            let cfg = CITestConfig {
                n_permutations: settings.n_permutations,
                alpha: settings.alpha,
                seed,
                estimator,
            };
            let r = ci_test(&generated.dataset, &cfg)?;
            let label = if cell.label == Label::Independent {
                Decision::Independent
            } else {
                Decision::Dependent
            };
            (r.statistic, Some(r.p_value), Some(r.decision), Some(label))
        }
    };
    Ok(RunRecord {
        task: settings.task,
        cell: cell.index,
        run,
        n: scenario.n,
        d: scenario.d,
        d_z: scenario.d_z,
        rho: scenario.rho,
        f: scenario.f,
        g: scenario.g,
        z_family: scenario.z_family,
        method: METHOD.to_string(),
        label,
        estimate,
        p_value,
        decision,
        ground_truth: generated.ground_truth_cmi,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOutput {
    pub records: Vec<RunRecord>,
    /// Seconds per record, same order.
    pub wall_times: Vec<f64>,
    pub cells: Vec<Cell>,
}

/// Runs the whole grid on a pool of `cfg.workers` threads.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkOutput> {
    run_benchmark_with_progress(cfg, |_, _| {})
}

/// As [`run_benchmark`], calling `progress(done, total)` after each run.
pub fn run_benchmark_with_progress(
    cfg: &BenchmarkConfig,
    progress: impl Fn(usize, usize) + Sync,
) -> Result<BenchmarkOutput> {
    let cells = cfg.cells()?;
    let settings = RunSettings::from(cfg);
    let jobs: Vec<(Cell, usize, u64)> = cells
        .iter()
        .flat_map(|c| (0..cfg.runs).map(move |r| (*c, r, run_seed(cfg.seed, c.index, r))))
        .collect();
    let total = jobs.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let results: Vec<(RunRecord, f64)> = pool.install(|| {
        jobs.par_iter()
            .map(|(cell, run, seed)| {
                let start = Instant::now();
                let record = run_one(cell, *run, *seed, &settings)?;
                let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                progress(k, total);
                Ok((record, start.elapsed().as_secs_f64()))
            })
            .collect::<Result<_>>()
    })?;
    let (records, wall_times) = results.into_iter().unzip();
    Ok(BenchmarkOutput {
        records,
        wall_times,
        cells,
    })
}

/// Mean ± 1.96 standard errors of the estimates in one MI/CMI cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: usize,
    pub n: usize,
    pub d: usize,
    pub d_z: usize,
    pub rho: f64,
    pub runs: usize,
    pub mean: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ground_truth: f64,
}

pub fn summarize_cells(records: &[RunRecord]) -> Vec<CellSummary> {
    let mut out: Vec<CellSummary> = Vec::new();
    for group in group_by_cell(records) {
        let first = group[0];
        let k = group.len();
        let mean = group.iter().map(|r| r.estimate).sum::<f64>() / k as f64;
        let stderr = if k > 1 {
            let var = group.iter().map(|r| (r.estimate - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        } else {
            f64::NAN
        };
        out.push(CellSummary {
            cell: first.cell,
            n: first.n,
            d: first.d,
            d_z: first.d_z,
            rho: first.rho,
            runs: k,
            mean,
            stderr,
            ci_low: mean - 1.96 * stderr,
            ci_high: mean + 1.96 * stderr,
            ground_truth: first.ground_truth,
        });
    }
    out
}

fn group_by_cell(records: &[RunRecord]) -> Vec<Vec<&RunRecord>> {
    let mut groups: Vec<Vec<&RunRecord>> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|g| g[0].cell == r.cell) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
}

/// CI-test metrics over runs with known labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    /// F1 with "dependent" as the positive class; 0 when there are no true
    /// positives.
    pub f1: f64,
    /// `None` when only one label is present.
    pub auc: Option<f64>,
    /// Rejection rate among truly independent runs.
    pub type1_rate: Option<f64>,
    /// Acceptance rate among truly dependent runs.
    pub type2_rate: Option<f64>,
    pub n_independent: usize,
    pub n_dependent: usize,
}

impl MetricsSummary {
    pub fn auc(&self) -> Result<f64> {
        self.auc.ok_or(Error::AucUndefined)
    }
}

/// A run's true label and p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPValue {
    pub dependent: bool,
    pub p_value: f64,
}

/// Decisions at `alpha` (dependent iff `p ≤ alpha`); AUC of the score
/// `1 − p` against the dependence label.
pub fn compute_metrics(records: &[LabeledPValue], alpha: f64) -> Result<MetricsSummary> {
    if records.is_empty() {
        return Err(Error::Data("no records to summarize".into()));
    }
    let (mut tp, mut fp, mut tn, mut fneg) = (0usize, 0usize, 0usize, 0usize);
    for r in records {
        let rejected = Decision::from_p_value(r.p_value, alpha) == Decision::Dependent;
        match (r.dependent, rejected) {
            (true, true) => tp += 1,
            (true, false) => fneg += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    let n_dependent = tp + fneg;
    let n_independent = fp + tn;
    let f1 = if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fneg) as f64
    };
    let labels: Vec<bool> = records.iter().map(|r| r.dependent).collect();
    let scores: Vec<f64> = records.iter().map(|r| 1.0 - r.p_value).collect();
    Ok(MetricsSummary {
        f1,
        auc: auc(&labels, &scores).ok(),
        type1_rate: (n_independent > 0).then(|| fp as f64 / n_independent as f64),
        type2_rate: (n_dependent > 0).then(|| fneg as f64 / n_dependent as f64),
        n_independent,
        n_dependent,
    })
}

/// Rank-sum AUC with midranks for ties: the probability that a positive
/// outscores a negative, ties counting one half.
pub fn auc(labels: &[bool], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::Data("labels and scores differ in length".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::AucUndefined);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks are 1-based; the tie block i..=j shares the mean rank
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_pos += midrank * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos * n_neg) as f64)
}

/// Metrics per CI cell, `(cell index, summary)`.
pub fn cit_metrics(records: &[RunRecord], alpha: f64) -> Result<Vec<(usize, MetricsSummary)>> {
    // CI cells come in (independent, dependent) pairs with consecutive indices
    let mut out: Vec<(usize, Vec<LabeledPValue>)> = Vec::new();
    for r in records {
        let (Some(label), Some(p)) = (r.label, r.p_value) else {
            return Err(Error::Data(format!("record {}/{} has no label or p-value", r.cell, r.run)));
        };
        let key = r.cell / 2;
        let entry = LabeledPValue {
            dependent: label == Decision::Dependent,
            p_value: p,
        };
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(entry),
            None => out.push((key, vec![entry])),
        }
    }
    out.into_iter().map(|(k, v)| Ok((k, compute_metrics(&v, alpha)?))).collect()
}

pub fn write_records(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_error)?;
    w.write_record(RECORD_COLUMNS).map_err(csv_error)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let dec = |d: Option<Decision>| match d {
        Some(Decision::Dependent) => "dependent".to_string(),
        Some(Decision::Independent) => "independent".to_string(),
        None => String::new(),
    };
    for r in records {
        w.write_record([
            r.task.to_string(),
            r.cell.to_string(),
            r.run.to_string(),
            r.n.to_string(),
            r.d.to_string(),
            r.d_z.to_string(),
            r.rho.to_string(),
            r.f.to_string(),
            r.g.to_string(),
            r.z_family.to_string(),
            r.method.clone(),
            dec(r.label),
            r.estimate.to_string(),
            opt(r.p_value),
            dec(r.decision),
            r.ground_truth.to_string(),
            r.seed.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_path(path.as_ref()).map_err(csv_error)?;
    let header: Vec<String> = rdr.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if header != RECORD_COLUMNS {
        return Err(Error::Data(format!("unexpected records header {header:?}")));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(csv_error)?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let bad = |c: usize| Error::Data(format!("row {row}, column {}: cannot parse {:?}", RECORD_COLUMNS[c], field(c)));
        let num = |c: usize| field(c).parse::<f64>().map_err(|_| bad(c));
        let int = |c: usize| field(c).parse::<usize>().map_err(|_| bad(c));
        let opt = |c: usize| -> Result<Option<f64>> { if field(c).is_empty() { Ok(None) } else { num(c).map(Some) } };
        let dec = |c: usize| -> Result<Option<Decision>> {
            match field(c) {
                "" => Ok(None),
                "dependent" => Ok(Some(Decision::Dependent)),
                "independent" => Ok(Some(Decision::Independent)),
                _ => Err(bad(c)),
            }
        };
        out.push(RunRecord {
            task: field(0).parse().map_err(|_| bad(0))?,
            cell: int(1)?,
            run: int(2)?,
            n: int(3)?,
            d: int(4)?,
            d_z: int(5)?,
            rho: num(6)?,
            f: field(7).parse().map_err(|_| bad(7))?,
            g: field(8).parse().map_err(|_| bad(8))?,
            z_family: field(9).parse().map_err(|_| bad(9))?,
            method: field(10).to_string(),
            label: dec(11)?,
            estimate: num(12)?,
            p_value: opt(13)?,
            decision: dec(14)?,
            ground_truth: num(15)?,
            seed: field(16).parse().map_err(|_| bad(16))?,
        });
    }
    Ok(out)
}

/// `<stem>.<suffix>.csv` next to the records file.
pub fn sidecar_path(records: &Path, suffix: &str) -> PathBuf {
    let stem = records.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    records.with_file_name(format!("{stem}.{suffix}.csv"))
}

pub fn write_timing(path: impl AsRef<Path>, records: &[RunRecord], wall_times: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_error)?;
    w.write_record(["cell", "run", "seed", "wall_time_s"]).map_err(csv_error)?;
    for (r, t) in records.iter().zip(wall_times) {
        w.write_record([r.cell.to_string(), r.run.to_string(), r.seed.to_string(), format!("{t:.4}")])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cell_summaries(path: impl AsRef<Path>, summaries: &[CellSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_error)?;
    for s in summaries {
        w.serialize(s).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics(path: impl AsRef<Path>, metrics: &[(usize, MetricsSummary)], records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_error)?;
    w.write_record(["cell", "n", "d", "d_z", "n_independent", "n_dependent", "f1", "auc", "type1_rate", "type2_rate"])
        .map_err(csv_error)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for (k, m) in metrics {
        let r = records.iter().find(|r| r.cell / 2 == *k).expect("metrics come from these records");
        w.write_record([
            k.to_string(),
            r.n.to_string(),
            r.d.to_string(),
            r.d_z.to_string(),
            m.n_independent.to_string(),
            m.n_dependent.to_string(),
            m.f1.to_string(),
            opt(m.auc),
            opt(m.type1_rate),
            opt(m.type2_rate),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force_auc(labels: &[bool], scores: &[f64]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li && !lj {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        wins / pairs
    }

    fn labeled(dependent: bool, p_value: f64) -> LabeledPValue {
        LabeledPValue { dependent, p_value }
    }

    #[test]
    fn perfect_separation() {
        let records: Vec<_> = (0..10).map(|i| labeled(i % 2 == 0, if i % 2 == 0 { 0.0 } else { 1.0 })).collect();
        let m = compute_metrics(&records, 0.05).unwrap();
        assert_eq!((m.f1, m.auc, m.type1_rate, m.type2_rate), (1.0, Some(1.0), Some(0.0), Some(0.0)));
        assert_eq!((m.n_dependent, m.n_independent), (5, 5));
    }

    #[test]
    fn uniform_p_values_give_chance_auc() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let records: Vec<_> = (0..200).map(|i| labeled(i < 100, rng.random_range(0.0..1.0))).collect();
        let m = compute_metrics(&records, 0.05).unwrap();
        assert!((m.auc.unwrap() - 0.5).abs() < 0.1);
    }

    #[test]
    fn single_label_leaves_auc_undefined() {
        let records = [labeled(true, 0.0), labeled(true, 0.5)];
        let m = compute_metrics(&records, 0.05).unwrap();
        assert_eq!(m.auc, None);
        assert!(matches!(m.auc(), Err(Error::AucUndefined)));
        assert_eq!(m.type1_rate, None);
        assert_eq!(m.type2_rate, Some(0.5));
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tied_scores_use_midranks() {
        let labels = [true, false, true, false, false];
        let scores = [0.5, 0.5, 0.9, 0.1, 0.5];
        assert_eq!(auc(&labels, &scores).unwrap(), brute_force_auc(&labels, &scores));
    }

    proptest! {
        #[test]
        fn auc_equals_pair_count(raw in proptest::collection::vec((any::<bool>(), 0u8..6), 2..80)) {
            let labels: Vec<bool> = raw.iter().map(|r| r.0).collect();
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            // few distinct values, so ties are common
            let scores: Vec<f64> = raw.iter().map(|r| r.1 as f64 / 5.0).collect();
            prop_assert_eq!(auc(&labels, &scores).unwrap(), brute_force_auc(&labels, &scores));
        }
    }

    #[test]
    fn cells_expand_in_order() {
        let mut cfg = BenchmarkConfig::new(Task::Mi);
        cfg.ds = vec![1, 2];
        cfg.rhos = vec![-0.9, 0.0, 0.9];
        cfg.d_zs = vec![3];
        let cells = cfg.cells().unwrap();
        assert_eq!(cells.len(), 6);
        assert!(cells.iter().all(|c| c.d_z == 0));
        assert_eq!(cells[4].label, Label::Rho(0.0));
        assert_eq!(cells[4].d, 2);
        let cit = BenchmarkConfig::new(Task::Cit).cells().unwrap();
        assert_eq!(cit.iter().map(|c| c.label).collect::<Vec<_>>(), vec![Label::Independent, Label::Dependent]);
        cfg.ns.clear();
        assert!(cfg.cells().is_err());
    }

    fn tiny_config(task: Task) -> BenchmarkConfig {
        let mut cfg = BenchmarkConfig::new(task);
        cfg.ns = vec![60];
        cfg.rhos = vec![0.0, 0.7];
        cfg.runs = 2;
        cfg.workers = 2;
        cfg.seed = 5;
        cfg.estimator = cfg.estimator.with_epochs(2);
        cfg.n_permutations = 5;
        cfg
    }

    #[test]
    fn records_round_trip_and_regenerate() {
        let dir = tempfile::tempdir().unwrap();
        for task in [Task::Cmi, Task::Cit] {
            let cfg = tiny_config(task);
            let out = run_benchmark(&cfg).unwrap();
            assert_eq!(out.records.len(), 4);
            let path = dir.path().join(format!("{task}.csv"));
            write_records(&path, &out.records).unwrap();
            assert_eq!(read_records(&path).unwrap(), out.records);
            let r = &out.records[3];
            let again = run_one(&out.cells[r.cell], r.run, r.seed, &RunSettings::from(&cfg)).unwrap();
            assert_eq!(&again, r);
        }
    }

    #[test]
    fn records_do_not_depend_on_worker_count() {
        let mut cfg = tiny_config(Task::Mi);
        let a = run_benchmark(&cfg).unwrap().records;
        cfg.workers = 1;
        assert_eq!(run_benchmark(&cfg).unwrap().records, a);
    }

    #[test]
    fn summaries_and_metrics() {
        let out = run_benchmark(&tiny_config(Task::Cmi)).unwrap();
        let s = summarize_cells(&out.records);
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].runs, 2);
        assert!(s[1].ci_low <= s[1].mean && s[1].mean <= s[1].ci_high);
        let out = run_benchmark(&tiny_config(Task::Cit)).unwrap();
        let m = cit_metrics(&out.records, 0.05).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].1.n_independent, m[0].1.n_dependent), (2, 2));
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar_path(Path::new("/tmp/out/run.csv"), "timing"), Path::new("/tmp/out/run.timing.csv"));
    }
}
