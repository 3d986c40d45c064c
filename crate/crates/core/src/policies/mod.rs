//! Bandit policies behind one contract: read-only `select` against a frozen
//! state, and `update_batch` applied at day boundaries.
//!
//! - [`FixedBaseline`] always plays the neutral arm (pure Juggler ranking).
//! - [`GaussianThompson`] keeps an independent known-variance Gaussian
//!   posterior per arm.
//! - [`EpsilonGreedy`] keeps empirical means with optimistic initialisation.
//! - [`RlsThompson`] keeps a Bayesian ridge regression per arm over the
//!   encoded context and samples coefficient vectors.

mod epsilon;
mod gaussian;
mod rls;

pub use epsilon::{EmpiricalArmState, EpsilonGreedy};
pub use gaussian::{GaussianArmState, GaussianThompson};
pub use rls::{LinearArmSnapshot, LinearArmState, RlsSnapshot, RlsThompson, RlsUpdate};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::ContextFeature;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("context vector has dimension {got}, policy expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("arm index {index} out of range for {arms} arms")]
    ArmOutOfRange { index: usize, arms: usize },
    #[error("reward {0} outside [0, 1]")]
    RewardOutOfRange(f64),
    #[error("covariance of arm {arm} is not positive definite")]
    NotPositiveDefinite { arm: usize },
    #[error("invalid policy configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub arm_index: usize,
    /// True iff the uniform-random branch of epsilon-greedy fired.
    pub was_exploration: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Empty for non-contextual policies.
    pub context_vector: Vec<f64>,
    pub arm_index: usize,
    pub reward: f64,
}

impl Observation {
    pub(crate) fn check(&self, arms: usize) -> Result<(), PolicyError> {
        if self.arm_index >= arms {
            return Err(PolicyError::ArmOutOfRange {
                index: self.arm_index,
                arms,
            });
        }
        if !(0.0..=1.0).contains(&self.reward) {
            return Err(PolicyError::RewardOutOfRange(self.reward));
        }
        Ok(())
    }
}

pub trait BanditPolicy {
    fn num_arms(&self) -> usize;

    /// Context dimension the policy expects; 0 for non-contextual policies,
    /// which ignore the context vector.
    fn context_dimension(&self) -> usize {
        0
    }

    fn select(&self, context: &[f64], rng: &mut dyn RngCore)
        -> Result<PolicyDecision, PolicyError>;

    /// Applies the observations one at a time, in order.
    fn update_batch(&mut self, observations: &[Observation]) -> Result<(), PolicyError>;
}

/// First index of the maximum; NaN never wins.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedBaseline {
    pub num_arms: usize,
    pub neutral_arm: usize,
}

impl BanditPolicy for FixedBaseline {
    fn num_arms(&self) -> usize {
        self.num_arms
    }

    fn select(&self, _: &[f64], _: &mut dyn RngCore) -> Result<PolicyDecision, PolicyError> {
        Ok(PolicyDecision {
            arm_index: self.neutral_arm,
            was_exploration: false,
        })
    }

    fn update_batch(&mut self, observations: &[Observation]) -> Result<(), PolicyError> {
        for obs in observations {
            obs.check(self.num_arms)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Baseline,
    GaussianThompson,
    EpsilonGreedy,
    RlsThompson,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Baseline => "baseline",
            Algorithm::GaussianThompson => "gaussian_thompson",
            Algorithm::EpsilonGreedy => "epsilon_greedy",
            Algorithm::RlsThompson => "rls_thompson",
        }
    }

    pub fn is_contextual(self) -> bool {
        self == Algorithm::RlsThompson
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Algorithm::Baseline),
            "gaussian_thompson" => Ok(Algorithm::GaussianThompson),
            "epsilon_greedy" => Ok(Algorithm::EpsilonGreedy),
            "rls_thompson" => Ok(Algorithm::RlsThompson),
            other => Err(format!(
                "unknown policy {other:?} (expected baseline, gaussian_thompson, epsilon_greedy or rls_thompson)"
            )),
        }
    }
}

/// Prior and noise parameters shared by the learning policies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Priors {
    /// Gaussian Thompson prior mean.
    pub mean: f64,
    /// Gaussian Thompson prior variance.
    pub variance: f64,
    /// RLS ridge strength; the coefficient prior is `N(0, I / lambda)`.
    pub ridge_lambda: f64,
    /// Known observation noise variance.
    pub obs_variance: f64,
    /// Epsilon-greedy mean for arms never pulled.
    pub optimistic_init: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Priors {
            mean: 0.5,
            variance: 1.0,
            ridge_lambda: 1.0,
            obs_variance: 0.05,
            optimistic_init: 1.0,
        }
    }
}

fn default_epsilon() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    /// Row name used in reports; derived from the algorithm when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub algorithm: Algorithm,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Contextual features (RLS only).
    #[serde(default)]
    pub features: Vec<ContextFeature>,
    #[serde(default)]
    pub priors: Priors,
    #[serde(default)]
    pub rls_update: RlsUpdate,
}

impl PolicyConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        PolicyConfig {
            label: None,
            algorithm,
            epsilon: default_epsilon(),
            features: Vec::new(),
            priors: Priors::default(),
            rls_update: RlsUpdate::default(),
        }
    }

    pub fn epsilon_greedy(epsilon: f64) -> Self {
        PolicyConfig {
            epsilon,
            ..PolicyConfig::new(Algorithm::EpsilonGreedy)
        }
    }

    pub fn rls(features: &[ContextFeature]) -> Self {
        PolicyConfig {
            features: features.to_vec(),
            ..PolicyConfig::new(Algorithm::RlsThompson)
        }
    }

    /// The eleven reference configurations: baseline, Gaussian Thompson,
    /// epsilon-greedy at 0.3 and 0.1, and RLS over every non-empty subset of
    /// brand, device and geo.
    pub fn standard_sweep() -> Vec<PolicyConfig> {
        use ContextFeature::{Brand, Device, Geo};
        let mut sweep = vec![
            PolicyConfig::new(Algorithm::Baseline),
            PolicyConfig::new(Algorithm::GaussianThompson),
            PolicyConfig::epsilon_greedy(0.3),
            PolicyConfig::epsilon_greedy(0.1),
        ];
        for features in [
            &[Brand][..],
            &[Device],
            &[Geo],
            &[Brand, Geo],
            &[Brand, Device],
            &[Device, Geo],
            &[Brand, Device, Geo],
        ] {
            sweep.push(PolicyConfig::rls(features));
        }
        sweep
    }

    /// Features the encoder must produce; empty for non-contextual policies.
    pub fn context_features(&self) -> &[ContextFeature] {
        if self.algorithm.is_contextual() {
            &self.features
        } else {
            &[]
        }
    }

    pub fn label(&self) -> String {
        if let Some(label) = &self.label {
            return label.clone();
        }
        match self.algorithm {
            Algorithm::EpsilonGreedy => format!("epsilon_greedy_{}", self.epsilon),
            Algorithm::RlsThompson => {
                let mut name = String::from("rls");
                for f in ContextFeature::ALL {
                    if self.features.contains(&f) {
                        name.push('_');
                        name.push_str(f.as_str());
                    }
                }
                name
            }
            other => other.as_str().to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        let p = &self.priors;
        let bad = |msg: &str| Err(PolicyError::InvalidConfig(msg.to_string()));
        if self.algorithm == Algorithm::EpsilonGreedy && !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1]");
        }
        if !(p.variance > 0.0 && p.variance.is_finite()) {
            return bad("prior variance must be positive");
        }
        if !(p.obs_variance > 0.0 && p.obs_variance.is_finite()) {
            return bad("observation variance must be positive");
        }
        if !(p.ridge_lambda > 0.0 && p.ridge_lambda.is_finite()) {
            return bad("ridge lambda must be positive");
        }
        if !p.mean.is_finite() || !p.optimistic_init.is_finite() {
            return bad("prior means must be finite");
        }
        if self.algorithm == Algorithm::RlsThompson && self.features.is_empty() {
            return bad("rls_thompson needs at least one contextual feature");
        }
        Ok(())
    }
}

/// A policy of any supported algorithm.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Baseline(FixedBaseline),
    GaussianThompson(GaussianThompson),
    EpsilonGreedy(EpsilonGreedy),
    RlsThompson(RlsThompson),
}

/// Complete, serialisable policy state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum PolicySnapshot {
    Baseline(FixedBaseline),
    GaussianThompson(GaussianThompson),
    EpsilonGreedy(EpsilonGreedy),
    RlsThompson(RlsSnapshot),
}

impl Policy {
    /// Fresh policy over `num_arms` arms. `dimension` is the encoded context
    /// length and is only used by contextual policies.
    pub fn new(
        config: &PolicyConfig,
        num_arms: usize,
        neutral_arm: usize,
        dimension: usize,
    ) -> Result<Self, PolicyError> {
        config.validate()?;
        if num_arms == 0 || neutral_arm >= num_arms {
            return Err(PolicyError::InvalidConfig("empty arm space".into()));
        }
        let p = config.priors;
        Ok(match config.algorithm {
            Algorithm::Baseline => Policy::Baseline(FixedBaseline {
                num_arms,
                neutral_arm,
            }),
            Algorithm::GaussianThompson => Policy::GaussianThompson(GaussianThompson::new(
                num_arms,
                p.mean,
                p.variance,
                p.obs_variance,
            )),
            Algorithm::EpsilonGreedy => Policy::EpsilonGreedy(EpsilonGreedy::new(
                num_arms,
                config.epsilon,
                p.optimistic_init,
            )),
            Algorithm::RlsThompson => Policy::RlsThompson(RlsThompson::new(
                num_arms,
                dimension,
                p.ridge_lambda,
                p.obs_variance,
                config.rls_update,
            )?),
        })
    }

    pub fn snapshot(&self) -> PolicySnapshot {
        match self {
            Policy::Baseline(p) => PolicySnapshot::Baseline(p.clone()),
            Policy::GaussianThompson(p) => PolicySnapshot::GaussianThompson(p.clone()),
            Policy::EpsilonGreedy(p) => PolicySnapshot::EpsilonGreedy(p.clone()),
            Policy::RlsThompson(p) => PolicySnapshot::RlsThompson(p.snapshot()),
        }
    }

    pub fn restore(snapshot: PolicySnapshot) -> Result<Self, PolicyError> {
        Ok(match snapshot {
            PolicySnapshot::Baseline(p) => Policy::Baseline(p),
            PolicySnapshot::GaussianThompson(p) => Policy::GaussianThompson(p),
            PolicySnapshot::EpsilonGreedy(p) => Policy::EpsilonGreedy(p),
            PolicySnapshot::RlsThompson(s) => Policy::RlsThompson(RlsThompson::restore(s)?),
        })
    }

    fn inner(&self) -> &dyn BanditPolicy {
        match self {
            Policy::Baseline(p) => p,
            Policy::GaussianThompson(p) => p,
            Policy::EpsilonGreedy(p) => p,
            Policy::RlsThompson(p) => p,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn BanditPolicy {
        match self {
            Policy::Baseline(p) => p,
            Policy::GaussianThompson(p) => p,
            Policy::EpsilonGreedy(p) => p,
            Policy::RlsThompson(p) => p,
        }
    }
}

impl BanditPolicy for Policy {
    fn num_arms(&self) -> usize {
        self.inner().num_arms()
    }

    fn context_dimension(&self) -> usize {
        self.inner().context_dimension()
    }

    fn select(
        &self,
        context: &[f64],
        rng: &mut dyn RngCore,
    ) -> Result<PolicyDecision, PolicyError> {
        self.inner().select(context, rng)
    }

    fn update_batch(&mut self, observations: &[Observation]) -> Result<(), PolicyError> {
        self.inner_mut().update_batch(observations)
    }
}
