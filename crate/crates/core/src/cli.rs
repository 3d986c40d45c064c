//! Run configuration and the command implementations behind the
//! `juggler-mab` binary. Every command reads its inputs, never modifies them,
//! and writes its outputs into a directory created on demand.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{generate, GenConfig, GenError, GenReport};
use crate::dataset::{Dataset, DatasetError};
use crate::domain::{ArmSpace, ZeroWeightWarning};
use crate::metrics::{
    compare_to_baseline, compare_top_k, summarize, top_k_stats, write_comparison_csv,
    write_csv_file, write_daily_csv, write_summary_csv, write_topk_delta_csv, DailyReport,
    MetricsError, RunSummary, SummaryDelta,
};
use crate::policies::{Algorithm, PolicyConfig, PolicyError};
use crate::reward::NdcgConfig;
use crate::simulator::{
    read_decisions, run, write_decisions, SimulationConfig, SimulationError, UpdateMode,
};

/// Environment variable capping within-day parallelism; 0 means automatic.
pub const THREADS_ENV: &str = "JUGGLER_MAB_THREADS";

pub const DEFAULT_K: usize = 10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Dataset {
        path: PathBuf,
        #[source]
        source: DatasetError,
    },
    #[error("missing {0}: set it in the config or pass the flag")]
    Missing(&'static str),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("policy: {0}")]
    Policy(#[from] PolicyError),
    #[error("{0}")]
    Usage(String),
}

fn default_k() -> usize {
    DEFAULT_K
}

/// Everything a simulate, sweep or report invocation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Decision log of the run used as the comparison baseline in reports.
    #[serde(default)]
    pub baseline: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub horizon_days: Option<u32>,
    #[serde(default)]
    pub ndcg: NdcgConfig,
    #[serde(default)]
    pub arm_space: ArmSpace,
    #[serde(default)]
    pub update_mode: UpdateMode,
    /// Policy for `simulate`; defaults to the fixed baseline.
    #[serde(default)]
    pub policy: Option<PolicyConfig>,
    /// Policies for `sweep`; defaults to [`PolicyConfig::standard_sweep`].
    #[serde(default)]
    pub policies: Vec<PolicyConfig>,
    #[serde(default = "default_k")]
    pub k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            output_dir: None,
            baseline: None,
            seed: 0,
            horizon_days: None,
            ndcg: NdcgConfig::default(),
            arm_space: ArmSpace::default(),
            update_mode: UpdateMode::default(),
            policy: None,
            policies: Vec::new(),
            k: DEFAULT_K,
        }
    }
}

impl RunConfig {
    pub fn simulation(&self, policy: PolicyConfig) -> SimulationConfig {
        SimulationConfig {
            seed: self.seed,
            horizon_days: self.horizon_days,
            ndcg: self.ndcg,
            arm_space: self.arm_space.clone(),
            policy,
            update_mode: self.update_mode,
        }
    }

    fn sweep_policies(&self) -> Vec<PolicyConfig> {
        if self.policies.is_empty() {
            PolicyConfig::standard_sweep()
        } else {
            self.policies.clone()
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub policy: Option<String>,
    pub k: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(d) = &self.data {
            cfg.dataset = Some(d.clone());
        }
        if let Some(o) = &self.out {
            cfg.output_dir = Some(o.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(name) = &self.policy {
            let policy = resolve_policy(name, cfg.policy.as_ref())?;
            cfg.policies = vec![policy.clone()];
            cfg.policy = Some(policy);
        }
        Ok(())
    }
}

/// Resolves `--policy`: a report label of the standard sweep such as
/// `rls_brand` or `epsilon_greedy_0.1`, or an algorithm name that keeps the
/// remaining settings of `base`.
pub fn resolve_policy(name: &str, base: Option<&PolicyConfig>) -> Result<PolicyConfig, CliError> {
    if let Some(p) = PolicyConfig::standard_sweep()
        .into_iter()
        .find(|p| p.label() == name)
    {
        return Ok(p);
    }
    let algorithm: Algorithm = name.parse().map_err(CliError::Usage)?;
    let mut policy = base
        .cloned()
        .unwrap_or_else(|| PolicyConfig::new(algorithm));
    policy.algorithm = algorithm;
    policy.label = None;
    if algorithm == Algorithm::RlsThompson && policy.features.is_empty() {
        policy.features = crate::domain::ContextFeature::ALL.to_vec();
    }
    Ok(policy)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let file = fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_run_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg: RunConfig = read_json(path)?;
    overrides.apply(&mut cfg)?;
    Ok(cfg)
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    Dataset::read_path(path).map_err(|source| CliError::Dataset {
        path: path.to_path_buf(),
        source,
    })
}

fn output_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg
        .output_dir
        .clone()
        .ok_or(CliError::Missing("output directory"))?;
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    Ok(dir)
}

fn write_file(
    path: &Path,
    write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(fs::File::create(path).map_err(io)?);
    write(&mut out).map_err(io)?;
    out.flush().map_err(io)
}

/// Writes the generated dataset to `out` and returns what was planted.
pub fn cmd_generate(config: &Path, out: &Path, seed: Option<u64>) -> Result<GenReport, CliError> {
    let mut cfg: GenConfig = read_json(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let (dataset, report) = generate(&cfg)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    dataset
        .write_path(out)
        .map_err(|source| CliError::Dataset {
            path: out.to_path_buf(),
            source,
        })?;
    Ok(report)
}

/// One finished policy run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub label: String,
    pub summary: RunSummary,
    pub daily: Vec<DailyReport>,
    pub decision_log: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutcome {
    pub runs: Vec<RunResult>,
    pub warnings: Vec<ZeroWeightWarning>,
}

/// Replays `policies` in order over one parsed dataset. Writes per-run
/// `decisions_<label>.jsonl` and `snapshot_<label>.json` plus combined
/// `summary.csv` and `daily.csv`.
pub fn run_policies(
    cfg: &RunConfig,
    policies: &[PolicyConfig],
    threads: usize,
) -> Result<SimulateOutcome, CliError> {
    let data_path = cfg.dataset.clone().ok_or(CliError::Missing("dataset"))?;
    let dir = output_dir(cfg)?;
    let dataset = load_dataset(&data_path)?;
    let warnings = dataset
        .validate(&cfg.arm_space)
        .map_err(|source| CliError::Dataset {
            path: data_path.clone(),
            source,
        })?;
    let mut labels: Vec<String> = Vec::new();
    for p in policies {
        p.validate()?;
        let label = p.label();
        if labels.contains(&label) {
            return Err(CliError::Usage(format!("duplicate policy label {label:?}")));
        }
        labels.push(label);
    }

    let mut runs = Vec::new();
    for (policy, label) in policies.iter().zip(labels) {
        let sim_cfg = cfg.simulation(policy.clone());
        let output = run(&dataset, &sim_cfg, threads)?;
        let log = dir.join(format!("decisions_{label}.jsonl"));
        write_file(&log, |w| write_decisions(w, &output.decisions))?;
        write_file(&dir.join(format!("snapshot_{label}.json")), |w| {
            serde_json::to_writer_pretty(&mut *w, &output.snapshot)?;
            writeln!(w)
        })?;
        let (summary, daily) = summarize(&output.decisions)?;
        runs.push(RunResult {
            label,
            summary,
            daily,
            decision_log: log,
        });
    }

    let summaries: Vec<(String, RunSummary)> = runs
        .iter()
        .map(|r| (r.label.clone(), r.summary.clone()))
        .collect();
    write_csv_file(dir.join("summary.csv"), |w| {
        write_summary_csv(w, &summaries)
    })?;
    let daily: Vec<(String, Vec<DailyReport>)> = runs
        .iter()
        .map(|r| (r.label.clone(), r.daily.clone()))
        .collect();
    write_csv_file(dir.join("daily.csv"), |w| write_daily_csv(w, &daily))?;
    Ok(SimulateOutcome { runs, warnings })
}

/// Runs the config's single policy (baseline when unset).
pub fn cmd_simulate(cfg: &RunConfig, threads: usize) -> Result<SimulateOutcome, CliError> {
    let policy = cfg
        .policy
        .clone()
        .unwrap_or_else(|| PolicyConfig::new(Algorithm::Baseline));
    run_policies(cfg, &[policy], threads)
}

/// Runs every policy of the config's list sequentially.
pub fn cmd_sweep(cfg: &RunConfig, threads: usize) -> Result<SimulateOutcome, CliError> {
    run_policies(cfg, &cfg.sweep_policies(), threads)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOutcome {
    pub comparisons: Vec<(String, SummaryDelta)>,
    pub topk_deltas: Vec<(String, BTreeMap<String, f64>)>,
}

/// Run name of a decision log: its file stem without the `decisions_` prefix.
pub fn run_name(log: &Path) -> String {
    let stem = log
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    stem.strip_prefix("decisions_")
        .map(str::to_string)
        .unwrap_or(stem)
}

/// Compares each log against the baseline log and writes `comparison.csv`
/// and `topk_delta.csv`.
pub fn cmd_report(cfg: &RunConfig, logs: &[PathBuf]) -> Result<ReportOutcome, CliError> {
    if logs.is_empty() {
        return Err(CliError::Usage(
            "report needs at least one decision log".into(),
        ));
    }
    let baseline_path = cfg
        .baseline
        .clone()
        .ok_or(CliError::Missing("baseline decision log"))?;
    let data_path = cfg.dataset.clone().ok_or(CliError::Missing("dataset"))?;
    let dir = output_dir(cfg)?;
    let dataset = load_dataset(&data_path)?;
    let read_log = |path: &Path| {
        let file = fs::File::open(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        read_decisions(BufReader::new(file)).map_err(|source| CliError::Dataset {
            path: path.to_path_buf(),
            source,
        })
    };

    let baseline = read_log(&baseline_path)?;
    let (baseline_summary, _) = summarize(&baseline)?;
    let baseline_topk = top_k_stats(&baseline, &dataset, &cfg.arm_space, cfg.k)?;
    let mut comparisons = Vec::new();
    let mut topk_deltas = Vec::new();
    for log in logs {
        let name = run_name(log);
        let decisions = read_log(log)?;
        let (summary, _) = summarize(&decisions)?;
        comparisons.push((
            name.clone(),
            compare_to_baseline(&summary, &baseline_summary)?,
        ));
        let topk = top_k_stats(&decisions, &dataset, &cfg.arm_space, cfg.k)?;
        topk_deltas.push((name, compare_top_k(&topk, &baseline_topk)?));
    }
    write_csv_file(dir.join("comparison.csv"), |w| {
        write_comparison_csv(w, &comparisons)
    })?;
    write_csv_file(dir.join("topk_delta.csv"), |w| {
        write_topk_delta_csv(w, &topk_deltas)
    })?;
    Ok(ReportOutcome {
        comparisons,
        topk_deltas,
    })
}

/// Reads [`THREADS_ENV`]; unset or empty means automatic.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        _ => Ok(0),
    }
}
