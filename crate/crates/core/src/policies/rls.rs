use nalgebra::{Cholesky, DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{argmax, BanditPolicy, Observation, PolicyDecision, PolicyError};

/// How the per-arm posterior is refreshed after each observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RlsUpdate {
    /// Rank-one update of the covariance and gain-form mean update.
    #[default]
    ShermanMorrison,
    /// Accumulate precision and target, then re-solve by Cholesky.
    PrecisionSolve,
}

/// Bayesian ridge regression state for one arm.
///
/// `precision` and `target` are the sufficient statistics
/// `A = lambda I + sum x x^T / s2` and `b = sum x r / s2`; `mean` and
/// `covariance` are the posterior `A^-1 b` and `A^-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearArmState {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub precision: DMatrix<f64>,
    pub target: DVector<f64>,
    pub pull_count: u64,
    /// Lower Cholesky factor of `covariance`, used for sampling.
    factor: DMatrix<f64>,
}

impl LinearArmState {
    fn prior(dimension: usize, ridge_lambda: f64) -> Self {
        let covariance = DMatrix::identity(dimension, dimension) / ridge_lambda;
        LinearArmState {
            mean: DVector::zeros(dimension),
            factor: DMatrix::identity(dimension, dimension) / ridge_lambda.sqrt(),
            covariance,
            precision: DMatrix::identity(dimension, dimension) * ridge_lambda,
            target: DVector::zeros(dimension),
            pull_count: 0,
        }
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    fn observe(
        &mut self,
        arm: usize,
        x: &DVector<f64>,
        reward: f64,
        obs_variance: f64,
        mode: RlsUpdate,
    ) -> Result<(), PolicyError> {
        self.precision += (x * x.transpose()) / obs_variance;
        self.target += x * (reward / obs_variance);
        self.pull_count += 1;
        match mode {
            RlsUpdate::ShermanMorrison => {
                let sx = &self.covariance * x;
                let denom = obs_variance + x.dot(&sx);
                let gain = &sx / denom;
                let residual = reward - x.dot(&self.mean);
                self.mean += &gain * residual;
                self.covariance -= &gain * sx.transpose();
            }
            RlsUpdate::PrecisionSolve => {
                let chol = Cholesky::new(self.precision.clone())
                    .ok_or(PolicyError::NotPositiveDefinite { arm })?;
                self.mean = chol.solve(&self.target);
                self.covariance = chol.inverse();
            }
        }
        symmetrize(&mut self.covariance);
        self.refresh_factor(arm)
    }

    fn refresh_factor(&mut self, arm: usize) -> Result<(), PolicyError> {
        self.factor = Cholesky::new(self.covariance.clone())
            .ok_or(PolicyError::NotPositiveDefinite { arm })?
            .unpack();
        Ok(())
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Thompson sampling over per-arm linear models of the encoded context.
#[derive(Debug, Clone, PartialEq)]
pub struct RlsThompson {
    dimension: usize,
    ridge_lambda: f64,
    obs_variance: f64,
    update: RlsUpdate,
    arms: Vec<LinearArmState>,
}

impl RlsThompson {
    pub fn new(
        num_arms: usize,
        dimension: usize,
        ridge_lambda: f64,
        obs_variance: f64,
        update: RlsUpdate,
    ) -> Result<Self, PolicyError> {
        if dimension == 0 {
            return Err(PolicyError::InvalidConfig(
                "rls_thompson needs a context dimension of at least 1".into(),
            ));
        }
        if !(ridge_lambda > 0.0) || !(obs_variance > 0.0) {
            return Err(PolicyError::InvalidConfig(
                "ridge lambda and observation variance must be positive".into(),
            ));
        }
        Ok(RlsThompson {
            dimension,
            ridge_lambda,
            obs_variance,
            update,
            arms: (0..num_arms)
                .map(|_| LinearArmState::prior(dimension, ridge_lambda))
                .collect(),
        })
    }

    pub fn arms(&self) -> &[LinearArmState] {
        &self.arms
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn check_dimension(&self, len: usize) -> Result<(), PolicyError> {
        if len != self.dimension {
            return Err(PolicyError::DimensionMismatch {
                expected: self.dimension,
                got: len,
            });
        }
        Ok(())
    }

    pub fn snapshot(&self) -> RlsSnapshot {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            m.row_iter().map(|r| r.iter().copied().collect()).collect()
        };
        RlsSnapshot {
            dimension: self.dimension,
            ridge_lambda: self.ridge_lambda,
            obs_variance: self.obs_variance,
            update: self.update,
            arms: self
                .arms
                .iter()
                .map(|a| LinearArmSnapshot {
                    mean: a.mean.iter().copied().collect(),
                    covariance: rows(&a.covariance),
                    precision: rows(&a.precision),
                    target: a.target.iter().copied().collect(),
                    pull_count: a.pull_count,
                })
                .collect(),
        }
    }

    pub fn restore(snapshot: RlsSnapshot) -> Result<Self, PolicyError> {
        let d = snapshot.dimension;
        let bad =
            |what: &str| PolicyError::InvalidConfig(format!("malformed rls snapshot: {what}"));
        let matrix = |rows: &[Vec<f64>]| -> Result<DMatrix<f64>, PolicyError> {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(bad("matrix shape"));
            }
            Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
        };
        let mut arms = Vec::with_capacity(snapshot.arms.len());
        for (i, a) in snapshot.arms.iter().enumerate() {
            if a.mean.len() != d || a.target.len() != d {
                return Err(bad("vector length"));
            }
            let covariance = matrix(&a.covariance)?;
            let mut state = LinearArmState {
                mean: DVector::from_vec(a.mean.clone()),
                factor: DMatrix::zeros(d, d),
                covariance,
                precision: matrix(&a.precision)?,
                target: DVector::from_vec(a.target.clone()),
                pull_count: a.pull_count,
            };
            state.refresh_factor(i)?;
            arms.push(state);
        }
        let mut policy = RlsThompson::new(
            arms.len(),
            d,
            snapshot.ridge_lambda,
            snapshot.obs_variance,
            snapshot.update,
        )?;
        policy.arms = arms;
        Ok(policy)
    }
}

impl BanditPolicy for RlsThompson {
    fn num_arms(&self) -> usize {
        self.arms.len()
    }

    fn context_dimension(&self) -> usize {
        self.dimension
    }

    fn select(
        &self,
        context: &[f64],
        rng: &mut dyn RngCore,
    ) -> Result<PolicyDecision, PolicyError> {
        self.check_dimension(context.len())?;
        let x = DVector::from_column_slice(context);
        let mut z = DVector::zeros(self.dimension);
        let mut scores = Vec::with_capacity(self.arms.len());
        for arm in &self.arms {
            for zi in z.iter_mut() {
                *zi = StandardNormal.sample(rng);
            }
            let theta = &arm.mean + &arm.factor * &z;
            scores.push(x.dot(&theta));
        }
        Ok(PolicyDecision {
            arm_index: argmax(scores),
            was_exploration: false,
        })
    }

    fn update_batch(&mut self, observations: &[Observation]) -> Result<(), PolicyError> {
        for obs in observations {
            obs.check(self.arms.len())?;
            self.check_dimension(obs.context_vector.len())?;
            let x = DVector::from_column_slice(&obs.context_vector);
            self.arms[obs.arm_index].observe(
                obs.arm_index,
                &x,
                obs.reward,
                self.obs_variance,
                self.update,
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearArmSnapshot {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub precision: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub pull_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlsSnapshot {
    pub dimension: usize,
    pub ridge_lambda: f64,
    pub obs_variance: f64,
    pub update: RlsUpdate,
    pub arms: Vec<LinearArmSnapshot>,
}
