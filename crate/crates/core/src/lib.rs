//! Multi-armed bandits that correct the per-search weights of a two-score
//! ranking model, evaluated by offline replay of logged searches.
//!
//! A ranking model predicts a utility weight and a compensation weight per
//! search; items are sorted by the weighted sum of their utility and
//! compensation scores. A bandit picks one of a small grid of additive
//! corrections (an *arm*) per search and is rewarded with the NDCG of the
//! resulting ranking against logged relevance labels.
//!
//! - [`domain`]: records, context encoding, the arm grid.
//! - [`reward`]: DCG and NDCG.
//! - [`scoring`]: ranking under an arm and the reward of every arm.
//! - [`policies`]: fixed baseline, Gaussian Thompson sampling,
//!   epsilon-greedy, and per-arm Bayesian linear regression (RLS) Thompson
//!   sampling.
//! - [`simulator`]: deterministic day-by-day replay with counterfactual
//!   regret, snapshots and resume.
//! - [`metrics`]: summaries, learning curves, baseline deltas, top-k
//!   attribute statistics and CSV output.
//! - [`datagen`]: synthetic logs with planted per-context best arms.
//! - [`cli`]: run configuration and the commands of the `juggler-mab` binary.

pub mod cli;
pub mod datagen;
pub mod dataset;
pub mod domain;
pub mod metrics;
pub mod policies;
pub mod reward;
pub mod rng;
pub mod scoring;
pub mod simulator;

pub use datagen::{generate, GenConfig, GenReport};
pub use dataset::Dataset;
pub use domain::{Arm, ArmSpace, Context, ContextFeature, Item, SearchRecord, Vocab};
pub use metrics::{compare_to_baseline, summarize, top_k_stats, RunSummary};
pub use policies::{Algorithm, BanditPolicy, Policy, PolicyConfig};
pub use reward::{ndcg, NdcgConfig};
pub use simulator::{run, DecisionRecord, SimulationConfig, Simulator};
