//! Aggregation of decision logs: whole-run summaries, per-day learning
//! curves and arm pulls, comparisons against a baseline run, and top-k item
//! statistics of the realized rankings.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::domain::{ArmSpace, DomainError};
use crate::scoring::rank;
use crate::simulator::DecisionRecord;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("decision log is empty")]
    EmptyLog,
    #[error("runs cover different datasets ({run} vs {baseline} searches)")]
    DatasetMismatch { run: usize, baseline: usize },
    #[error("search {0} is not in the dataset")]
    UnknownSearch(String),
    #[error("no search has any item carrying an attribute in its top {0}")]
    NoAttributes(usize),
    #[error("top-k window must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Attributes reported by [`top_k_stats`], in report order.
pub const ATTRIBUTES: [&str; 5] = [
    "daily_price",
    "guest_rating",
    "star_rating",
    "margin_pct",
    "margin_abs",
];

/// Pairwise summation over fixed 32-element leaves; the result depends only
/// on the slice contents, not on how the work is scheduled.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub search_count: usize,
    pub avg_reward: f64,
    pub avg_regret: f64,
    pub avg_best_reward: f64,
    pub best_arm_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyReport {
    pub day_index: u32,
    pub search_count: usize,
    pub mean_reward: f64,
    pub mean_regret: f64,
    pub best_arm_rate: f64,
    pub arm_pulls: Vec<u64>,
}

fn aggregate(decisions: &[DecisionRecord]) -> (f64, f64, f64, f64) {
    let rewards: Vec<f64> = decisions.iter().map(|d| d.realized_reward).collect();
    let regrets: Vec<f64> = decisions.iter().map(|d| d.regret).collect();
    let best: Vec<f64> = decisions.iter().map(|d| d.best_reward).collect();
    let hits = decisions.iter().filter(|d| d.is_best_arm).count();
    (
        mean(&rewards),
        mean(&regrets),
        mean(&best),
        hits as f64 / decisions.len() as f64,
    )
}

/// Whole-run summary and per-day reports, grouped by `day_index` in order of
/// appearance.
pub fn summarize(
    decisions: &[DecisionRecord],
) -> Result<(RunSummary, Vec<DailyReport>), MetricsError> {
    if decisions.is_empty() {
        return Err(MetricsError::EmptyLog);
    }
    let num_arms = decisions
        .iter()
        .map(|d| d.counterfactual_rewards.len().max(d.chosen_arm_index + 1))
        .max()
        .unwrap_or(0);

    let mut days = Vec::new();
    let mut start = 0;
    while start < decisions.len() {
        let day = decisions[start].day_index;
        let len = decisions[start..]
            .iter()
            .take_while(|d| d.day_index == day)
            .count();
        let slice = &decisions[start..start + len];
        let (mean_reward, mean_regret, _, best_arm_rate) = aggregate(slice);
        let mut arm_pulls = vec![0u64; num_arms];
        for d in slice {
            arm_pulls[d.chosen_arm_index] += 1;
        }
        days.push(DailyReport {
            day_index: day,
            search_count: len,
            mean_reward,
            mean_regret,
            best_arm_rate,
            arm_pulls,
        });
        start += len;
    }

    let (avg_reward, avg_regret, avg_best_reward, best_arm_pct) = aggregate(decisions);
    Ok((
        RunSummary {
            search_count: decisions.len(),
            avg_reward,
            avg_regret,
            avg_best_reward,
            best_arm_pct,
        },
        days,
    ))
}

/// Absolute and relative change of one metric against a baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub value: f64,
    pub baseline: f64,
    pub absolute: f64,
    /// `(value - baseline) / baseline`; `None` when the baseline is zero.
    pub relative: Option<f64>,
}

impl MetricDelta {
    pub fn new(value: f64, baseline: f64) -> Self {
        MetricDelta {
            value,
            baseline,
            absolute: value - baseline,
            relative: (baseline != 0.0).then(|| (value - baseline) / baseline),
        }
    }

    /// Relative change as a signed percentage with one decimal, e.g. `+2.9%`.
    pub fn relative_pct(&self) -> String {
        match self.relative {
            Some(r) => format!("{:+.1}%", r * 100.0),
            None => "n/a".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDelta {
    pub reward: MetricDelta,
    pub regret: MetricDelta,
    pub best_arm_pct: MetricDelta,
}

pub fn compare_to_baseline(
    run: &RunSummary,
    baseline: &RunSummary,
) -> Result<SummaryDelta, MetricsError> {
    if run.search_count != baseline.search_count {
        return Err(MetricsError::DatasetMismatch {
            run: run.search_count,
            baseline: baseline.search_count,
        });
    }
    Ok(SummaryDelta {
        reward: MetricDelta::new(run.avg_reward, baseline.avg_reward),
        regret: MetricDelta::new(run.avg_regret, baseline.avg_regret),
        best_arm_pct: MetricDelta::new(run.best_arm_pct, baseline.best_arm_pct),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKStats {
    pub k: usize,
    pub search_count: usize,
    /// Mean over searches of the per-search top-k attribute mean.
    pub means: BTreeMap<String, f64>,
    /// Number of searches contributing to each attribute.
    pub counts: BTreeMap<String, usize>,
}

/// Averages item attributes over the first `min(k, n)` items of each
/// search's realized ranking, then over searches. Items lacking an
/// attribute are left out of that attribute's averages.
pub fn top_k_stats(
    decisions: &[DecisionRecord],
    dataset: &Dataset,
    arm_space: &ArmSpace,
    k: usize,
) -> Result<TopKStats, MetricsError> {
    if k == 0 {
        return Err(MetricsError::ZeroK);
    }
    let by_id: HashMap<&str, usize> = dataset
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.search_id.as_str(), i))
        .collect();
    let mut per_search: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for d in decisions {
        let &idx = by_id
            .get(d.search_id.as_str())
            .ok_or_else(|| MetricsError::UnknownSearch(d.search_id.clone()))?;
        let record = &dataset.records[idx];
        let arm = arm_space.arm(d.chosen_arm_index)?;
        let ranking = rank(record, &arm);
        let window = &ranking.ordered_item_indices[..k.min(ranking.ordered_item_indices.len())];
        for name in ATTRIBUTES {
            let values: Vec<f64> = window
                .iter()
                .filter_map(|&i| record.items[i].attributes.get(name).copied())
                .collect();
            if !values.is_empty() {
                per_search.entry(name).or_default().push(mean(&values));
            }
        }
    }
    if per_search.is_empty() {
        return Err(MetricsError::NoAttributes(k));
    }
    Ok(TopKStats {
        k,
        search_count: decisions.len(),
        means: per_search
            .iter()
            .map(|(name, v)| (name.to_string(), mean(v)))
            .collect(),
        counts: per_search
            .iter()
            .map(|(name, v)| (name.to_string(), v.len()))
            .collect(),
    })
}

/// Per-attribute `run - baseline` over attributes present in both.
pub fn compare_top_k(
    run: &TopKStats,
    baseline: &TopKStats,
) -> Result<BTreeMap<String, f64>, MetricsError> {
    if run.search_count != baseline.search_count {
        return Err(MetricsError::DatasetMismatch {
            run: run.search_count,
            baseline: baseline.search_count,
        });
    }
    Ok(run
        .means
        .iter()
        .filter_map(|(name, v)| baseline.means.get(name).map(|b| (name.clone(), v - b)))
        .collect())
}

/// `summary.csv`: one row per run.
pub fn write_summary_csv(
    out: impl Write,
    runs: &[(String, RunSummary)],
) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["policy", "avg_reward", "avg_regret", "best_arm_pct"])?;
    for (name, s) in runs {
        w.write_record([
            name.clone(),
            s.avg_reward.to_string(),
            s.avg_regret.to_string(),
            s.best_arm_pct.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `daily.csv`: one row per (run, day), one pull-count column per arm.
pub fn write_daily_csv(
    out: impl Write,
    runs: &[(String, Vec<DailyReport>)],
) -> Result<(), MetricsError> {
    let num_arms = runs
        .iter()
        .flat_map(|(_, days)| days.iter().map(|d| d.arm_pulls.len()))
        .max()
        .unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["run", "day", "mean_reward", "mean_regret", "best_arm_rate"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..num_arms).map(|a| format!("pulls_arm_{a}")));
    w.write_record(&header)?;
    for (name, days) in runs {
        for d in days {
            let mut row = vec![
                name.clone(),
                d.day_index.to_string(),
                d.mean_reward.to_string(),
                d.mean_regret.to_string(),
                d.best_arm_rate.to_string(),
            ];
            row.extend((0..num_arms).map(|a| d.arm_pulls.get(a).copied().unwrap_or(0).to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `topk_delta.csv`: one row per attribute, one delta column per run.
pub fn write_topk_delta_csv(
    out: impl Write,
    runs: &[(String, BTreeMap<String, f64>)],
) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["attribute".to_string()];
    header.extend(runs.iter().map(|(name, _)| name.clone()));
    w.write_record(&header)?;
    for attr in ATTRIBUTES {
        if runs.iter().all(|(_, d)| !d.contains_key(attr)) {
            continue;
        }
        let mut row = vec![attr.to_string()];
        row.extend(
            runs.iter()
                .map(|(_, d)| d.get(attr).map(|v| v.to_string()).unwrap_or_default()),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `comparison.csv`: run metrics and their deltas to the baseline.
pub fn write_comparison_csv(
    out: impl Write,
    runs: &[(String, SummaryDelta)],
) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "run",
        "avg_reward",
        "avg_regret",
        "best_arm_pct",
        "reward_delta",
        "reward_delta_pct",
        "regret_delta",
        "regret_delta_pct",
        "best_arm_delta",
        "best_arm_delta_pct",
    ])?;
    let pct = |m: &MetricDelta| {
        m.relative
            .map(|r| (r * 100.0).to_string())
            .unwrap_or_default()
    };
    for (name, d) in runs {
        w.write_record([
            name.clone(),
            d.reward.value.to_string(),
            d.regret.value.to_string(),
            d.best_arm_pct.value.to_string(),
            d.reward.absolute.to_string(),
            pct(&d.reward),
            d.regret.absolute.to_string(),
            pct(&d.regret),
            d.best_arm_pct.absolute.to_string(),
            pct(&d.best_arm_pct),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(
    path: impl AsRef<Path>,
    write: impl FnOnce(std::io::BufWriter<std::fs::File>) -> Result<(), MetricsError>,
) -> Result<(), MetricsError> {
    let file = std::fs::File::create(path)?;
    write(std::io::BufWriter::new(file))
}
