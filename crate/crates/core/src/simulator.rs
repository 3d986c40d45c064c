//! Deterministic day-by-day replay of logged searches under a bandit policy.
//!
//! Within a day the policy state is frozen: every search is encoded, given
//! its own random stream, assigned an arm, and scored under every arm of the
//! grid. At the day boundary the day's observations are fed to the policy.
//! Searches of one day may be evaluated in parallel; output order and values
//! do not depend on the thread count.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError};
use crate::domain::{validate_record, ArmSpace, ContextEncoder, DomainError, SearchRecord, Vocab};
use crate::policies::{
    BanditPolicy, Observation, Policy, PolicyConfig, PolicyError, PolicySnapshot,
};
use crate::reward::NdcgConfig;
use crate::rng::{substream, StreamKind};
use crate::scoring::reward_of_arm;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("invalid record: {0}")]
    Invalid(#[from] DomainError),
    #[error("search {search_id}: {source}")]
    Policy {
        search_id: String,
        #[source]
        source: PolicyError,
    },
    #[error("policy: {0}")]
    PolicySetup(#[from] PolicyError),
    #[error("expected records of day {expected}, got day {got} (search {search_id})")]
    DayMismatch {
        expected: u32,
        got: u32,
        search_id: String,
    },
    #[error("horizon_days must be at least 1")]
    EmptyHorizon,
    #[error("horizon of {horizon} days exceeds the {available} days in the dataset")]
    HorizonTooLong { horizon: u32, available: u32 },
    #[error("snapshot was taken under a different configuration: {0}")]
    SnapshotMismatch(&'static str),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// How a day's feedback is turned into policy updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// Every search contributes one observation, in logged order.
    #[default]
    PerObservation,
    /// One observation per (arm, context vector) carrying the day's mean
    /// reward, in order of first occurrence.
    DailyMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub seed: u64,
    /// Number of days to replay; `None` replays every day in the dataset.
    #[serde(default)]
    pub horizon_days: Option<u32>,
    #[serde(default)]
    pub ndcg: NdcgConfig,
    #[serde(default)]
    pub arm_space: ArmSpace,
    pub policy: PolicyConfig,
    #[serde(default)]
    pub update_mode: UpdateMode,
}

impl SimulationConfig {
    pub fn new(seed: u64, policy: PolicyConfig) -> Self {
        SimulationConfig {
            seed,
            horizon_days: None,
            ndcg: NdcgConfig::default(),
            arm_space: ArmSpace::default(),
            policy,
            update_mode: UpdateMode::default(),
        }
    }
}

/// Outcome of one replayed search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub search_id: String,
    pub day_index: u32,
    pub chosen_arm_index: usize,
    pub realized_reward: f64,
    /// Reward of every arm of the grid on this search.
    pub counterfactual_rewards: Vec<f64>,
    pub best_reward: f64,
    pub regret: f64,
    pub is_best_arm: bool,
    pub was_exploration: bool,
}

/// Per-search oracle: every arm achieving the maximum reward, and that reward.
pub fn oracle_best_arm(
    record: &SearchRecord,
    arm_space: &ArmSpace,
    ndcg: &NdcgConfig,
) -> (Vec<usize>, f64) {
    let rewards: Vec<f64> = arm_space
        .arms()
        .map(|arm| reward_of_arm(record, &arm, ndcg))
        .collect();
    best_of(&rewards)
}

fn best_of(rewards: &[f64]) -> (Vec<usize>, f64) {
    let best = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let set = rewards
        .iter()
        .enumerate()
        .filter(|(_, &r)| r == best)
        .map(|(i, _)| i)
        .collect();
    (set, best)
}

/// Resumable simulator state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatorSnapshot {
    pub seed: u64,
    pub next_day: u32,
    pub policy: PolicySnapshot,
}

pub struct Simulator {
    config: SimulationConfig,
    encoder: ContextEncoder,
    policy: Policy,
    next_day: u32,
    pool: Option<rayon::ThreadPool>,
}

impl Simulator {
    pub fn new(config: SimulationConfig, vocab: &Vocab) -> Result<Self, SimulationError> {
        let encoder = ContextEncoder::new(vocab.clone(), config.policy.context_features());
        let policy = Policy::new(
            &config.policy,
            config.arm_space.len(),
            config.arm_space.neutral_index(),
            encoder.dimension(),
        )?;
        Ok(Simulator {
            config,
            encoder,
            policy,
            next_day: 0,
            pool: None,
        })
    }

    /// Continues a run from a snapshot taken with the same configuration.
    pub fn resume(
        config: SimulationConfig,
        vocab: &Vocab,
        snapshot: SimulatorSnapshot,
    ) -> Result<Self, SimulationError> {
        let mut sim = Simulator::new(config, vocab)?;
        if snapshot.seed != sim.config.seed {
            return Err(SimulationError::SnapshotMismatch("seed"));
        }
        let policy = Policy::restore(snapshot.policy)?;
        if policy.num_arms() != sim.policy.num_arms()
            || policy.context_dimension() != sim.policy.context_dimension()
            || std::mem::discriminant(&policy) != std::mem::discriminant(&sim.policy)
        {
            return Err(SimulationError::SnapshotMismatch("policy shape"));
        }
        sim.policy = policy;
        sim.next_day = snapshot.next_day;
        Ok(sim)
    }

    /// Caps within-day parallelism; 0 lets rayon pick.
    pub fn with_threads(mut self, threads: usize) -> Result<Self, SimulationError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| SimulationError::ThreadPool(e.to_string()))?;
        self.pool = Some(pool);
        Ok(self)
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn next_day(&self) -> u32 {
        self.next_day
    }

    pub fn snapshot(&self) -> SimulatorSnapshot {
        SimulatorSnapshot {
            seed: self.config.seed,
            next_day: self.next_day,
            policy: self.policy.snapshot(),
        }
    }

    /// Replays one day. `records` must all belong to `self.next_day()`.
    pub fn step_day(
        &mut self,
        records: &[SearchRecord],
    ) -> Result<Vec<DecisionRecord>, SimulationError> {
        let day = self.next_day;
        for record in records {
            if record.day_index != day {
                return Err(SimulationError::DayMismatch {
                    expected: day,
                    got: record.day_index,
                    search_id: record.search_id.clone(),
                });
            }
        }

        let evaluate = || -> Result<Vec<(DecisionRecord, Vec<f64>)>, SimulationError> {
            records
                .par_iter()
                .enumerate()
                .map(|(seq, record)| self.decide(day, seq as u32, record))
                .collect()
        };
        let evaluated = match &self.pool {
            Some(pool) => pool.install(evaluate)?,
            None => evaluate()?,
        };

        let observations: Vec<Observation> = evaluated
            .iter()
            .map(|(d, x)| Observation {
                context_vector: x.clone(),
                arm_index: d.chosen_arm_index,
                reward: d.realized_reward,
            })
            .collect();
        let observations = match self.config.update_mode {
            UpdateMode::PerObservation => observations,
            UpdateMode::DailyMean => daily_means(&observations),
        };
        self.policy.update_batch(&observations)?;
        self.next_day += 1;
        Ok(evaluated.into_iter().map(|(d, _)| d).collect())
    }

    fn decide(
        &self,
        day: u32,
        seq: u32,
        record: &SearchRecord,
    ) -> Result<(DecisionRecord, Vec<f64>), SimulationError> {
        let arm_space = &self.config.arm_space;
        validate_record(record, arm_space, self.encoder_vocab())?;
        let context = if self.config.policy.algorithm.is_contextual() {
            self.encoder.encode(&record.context)?
        } else {
            Vec::new()
        };
        let mut rng = substream(self.config.seed, StreamKind::Selection, day, seq);
        let decision =
            self.policy
                .select(&context, &mut rng)
                .map_err(|source| SimulationError::Policy {
                    search_id: record.search_id.clone(),
                    source,
                })?;
        let counterfactual_rewards: Vec<f64> = arm_space
            .arms()
            .map(|arm| reward_of_arm(record, &arm, &self.config.ndcg))
            .collect();
        let realized_reward = counterfactual_rewards[decision.arm_index];
        let (_, best_reward) = best_of(&counterfactual_rewards);
        Ok((
            DecisionRecord {
                search_id: record.search_id.clone(),
                day_index: day,
                chosen_arm_index: decision.arm_index,
                realized_reward,
                best_reward,
                regret: best_reward - realized_reward,
                is_best_arm: realized_reward == best_reward,
                was_exploration: decision.was_exploration,
                counterfactual_rewards,
            },
            context,
        ))
    }

    fn encoder_vocab(&self) -> &Vocab {
        self.encoder.vocab()
    }
}

fn daily_means(observations: &[Observation]) -> Vec<Observation> {
    let mut groups: Vec<(Observation, usize)> = Vec::new();
    let mut index: HashMap<(usize, Vec<u64>), usize> = HashMap::new();
    for obs in observations {
        let key = (
            obs.arm_index,
            obs.context_vector.iter().map(|v| v.to_bits()).collect(),
        );
        match index.get(&key) {
            Some(&g) => {
                groups[g].0.reward += obs.reward;
                groups[g].1 += 1;
            }
            None => {
                index.insert(key, groups.len());
                groups.push((obs.clone(), 1));
            }
        }
    }
    groups
        .into_iter()
        .map(|(mut obs, n)| {
            obs.reward /= n as f64;
            obs
        })
        .collect()
}

/// Writes one JSON line per decision.
pub fn write_decisions(mut out: impl Write, decisions: &[DecisionRecord]) -> std::io::Result<()> {
    for d in decisions {
        serde_json::to_writer(&mut out, d)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_decisions(reader: impl Read) -> Result<Vec<DecisionRecord>, DatasetError> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| DatasetError::Parse {
                line: n + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

/// Decisions of a full replay and the policy state after the last day.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub decisions: Vec<DecisionRecord>,
    pub snapshot: SimulatorSnapshot,
}

/// Replays the dataset from day 0 over the configured horizon.
pub fn run(
    dataset: &Dataset,
    config: &SimulationConfig,
    threads: usize,
) -> Result<SimulationOutput, SimulationError> {
    let sim = Simulator::new(config.clone(), dataset.vocab())?.with_threads(threads)?;
    continue_run(sim, dataset, config)
}

/// Replays the remaining days of the horizon from the simulator's current day.
pub fn continue_run(
    mut sim: Simulator,
    dataset: &Dataset,
    config: &SimulationConfig,
) -> Result<SimulationOutput, SimulationError> {
    let horizon = horizon_days(dataset, config)?;
    let days = dataset.day_slices()?;
    let mut decisions = Vec::new();
    while sim.next_day() < horizon {
        let day = days[sim.next_day() as usize];
        decisions.extend(sim.step_day(day)?);
    }
    Ok(SimulationOutput {
        decisions,
        snapshot: sim.snapshot(),
    })
}

/// Replays days up to (excluding) `stop_day` and returns the live simulator.
pub fn run_until(
    dataset: &Dataset,
    config: &SimulationConfig,
    stop_day: u32,
    threads: usize,
) -> Result<(Simulator, Vec<DecisionRecord>), SimulationError> {
    let mut sim = Simulator::new(config.clone(), dataset.vocab())?.with_threads(threads)?;
    let horizon = horizon_days(dataset, config)?.min(stop_day);
    let days = dataset.day_slices()?;
    let mut decisions = Vec::new();
    while sim.next_day() < horizon {
        decisions.extend(sim.step_day(days[sim.next_day() as usize])?);
    }
    Ok((sim, decisions))
}

fn horizon_days(dataset: &Dataset, config: &SimulationConfig) -> Result<u32, SimulationError> {
    let available = dataset.day_slices()?.len() as u32;
    let horizon = config.horizon_days.unwrap_or(available);
    if horizon == 0 {
        return Err(SimulationError::EmptyHorizon);
    }
    if horizon > available {
        return Err(SimulationError::HorizonTooLong { horizon, available });
    }
    Ok(horizon)
}
