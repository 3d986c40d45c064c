use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{argmax, BanditPolicy, Observation, PolicyDecision, PolicyError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalArmState {
    pub mean_reward: f64,
    pub pull_count: u64,
}

/// Epsilon-greedy over empirical means; unpulled arms hold an optimistic
/// initial mean so every arm gets tried before exploitation settles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonGreedy {
    pub epsilon: f64,
    pub arms: Vec<EmpiricalArmState>,
}

impl EpsilonGreedy {
    pub fn new(num_arms: usize, epsilon: f64, optimistic_init: f64) -> Self {
        EpsilonGreedy {
            epsilon,
            arms: vec![
                EmpiricalArmState {
                    mean_reward: optimistic_init,
                    pull_count: 0,
                };
                num_arms
            ],
        }
    }
}

impl BanditPolicy for EpsilonGreedy {
    fn num_arms(&self) -> usize {
        self.arms.len()
    }

    fn select(&self, _: &[f64], rng: &mut dyn RngCore) -> Result<PolicyDecision, PolicyError> {
        let u: f64 = rng.random();
        if u < self.epsilon {
            return Ok(PolicyDecision {
                arm_index: rng.random_range(0..self.arms.len()),
                was_exploration: true,
            });
        }
        Ok(PolicyDecision {
            arm_index: argmax(self.arms.iter().map(|a| a.mean_reward)),
            was_exploration: false,
        })
    }

    fn update_batch(&mut self, observations: &[Observation]) -> Result<(), PolicyError> {
        for obs in observations {
            obs.check(self.arms.len())?;
            let arm = &mut self.arms[obs.arm_index];
            arm.pull_count += 1;
            // first pull replaces the optimistic value outright
            arm.mean_reward += (obs.reward - arm.mean_reward) / arm.pull_count as f64;
        }
        Ok(())
    }
}
