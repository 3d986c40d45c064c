use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{argmax, BanditPolicy, Observation, PolicyDecision, PolicyError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianArmState {
    pub posterior_mean: f64,
    pub posterior_variance: f64,
    pub pull_count: u64,
}

impl GaussianArmState {
    /// Conjugate update of a Gaussian mean with known noise variance.
    pub fn observe(&mut self, reward: f64, obs_variance: f64) {
        let prior_precision = 1.0 / self.posterior_variance;
        let variance = 1.0 / (prior_precision + 1.0 / obs_variance);
        self.posterior_mean =
            variance * (self.posterior_mean * prior_precision + reward / obs_variance);
        self.posterior_variance = variance;
        self.pull_count += 1;
    }
}

/// Thompson sampling with an independent Gaussian posterior per arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianThompson {
    pub obs_variance: f64,
    pub arms: Vec<GaussianArmState>,
}

impl GaussianThompson {
    pub fn new(num_arms: usize, prior_mean: f64, prior_variance: f64, obs_variance: f64) -> Self {
        GaussianThompson {
            obs_variance,
            arms: vec![
                GaussianArmState {
                    posterior_mean: prior_mean,
                    posterior_variance: prior_variance,
                    pull_count: 0,
                };
                num_arms
            ],
        }
    }
}

impl BanditPolicy for GaussianThompson {
    fn num_arms(&self) -> usize {
        self.arms.len()
    }

    fn select(&self, _: &[f64], rng: &mut dyn RngCore) -> Result<PolicyDecision, PolicyError> {
        let samples = self.arms.iter().map(|arm| {
            let z: f64 = StandardNormal.sample(rng);
            arm.posterior_mean + arm.posterior_variance.sqrt() * z
        });
        Ok(PolicyDecision {
            arm_index: argmax(samples),
            was_exploration: false,
        })
    }

    fn update_batch(&mut self, observations: &[Observation]) -> Result<(), PolicyError> {
        for obs in observations {
            obs.check(self.arms.len())?;
            self.arms[obs.arm_index].observe(obs.reward, self.obs_variance);
        }
        Ok(())
    }
}
