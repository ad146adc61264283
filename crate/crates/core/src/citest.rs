//! Permutation test of `X ⫫ Y | Z` with the DINE statistic.
//!
//! The flows are trained once; each bootstrap shuffles the rows of `y′`
//! against the frozen `x′` and recomputes only the closed-form Gaussian MI.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Matrix};
use crate::error::{Error, Result, StageExt};
use crate::estimator::{fit_surrogates, surrogate_mi, EstimatorConfig};
use crate::flow::SurrogateSample;
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CITestConfig {
    /// Number of permutations `B`.
    pub n_permutations: usize,
    pub alpha: f64,
    /// Seed of the permutation stream; the flows use `estimator.train.seed`.
    pub seed: u64,
    pub estimator: EstimatorConfig,
}

impl Default for CITestConfig {
    fn default() -> Self {
        Self {
            n_permutations: 100,
            alpha: 0.05,
            seed: 0,
            estimator: EstimatorConfig::default(),
        }
    }
}

impl CITestConfig {
    /// Uses `seed` for both the flows and the permutations.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.estimator.train.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_permutations == 0 {
            return Err(Error::Config("n_permutations must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Independent,
    Dependent,
}

impl Decision {
    /// Dependence is declared iff `p_value ≤ alpha`.
    pub fn from_p_value(p_value: f64, alpha: f64) -> Self {
        if p_value <= alpha {
            Decision::Dependent
        } else {
            Decision::Independent
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CITestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub permuted_stats: Vec<f64>,
    pub decision: Decision,
}

/// `(1/B) · |{b : statistic ≤ permuted[b]}|`.
pub fn p_value(statistic: f64, permuted: &[f64]) -> Result<f64> {
    if permuted.is_empty() {
        return Err(Error::Config("p-value needs at least one permuted statistic".into()));
    }
    let hits = permuted.iter().filter(|&&s| statistic <= s).count();
    Ok(hits as f64 / permuted.len() as f64)
}

/// Gaussian MI of `x′` against `y′` with its rows reordered by `perm`.
pub fn null_statistic(x: &SurrogateSample, y: &SurrogateSample, perm: &[usize]) -> Result<f64> {
    if perm.len() != y.values.n_rows() {
        return Err(Error::Config(format!(
            "permutation has length {}, expected {}",
            perm.len(),
            y.values.n_rows()
        )));
    }
    let shuffled: Matrix = y.values.select_rows(perm);
    surrogate_mi(&x.values, &shuffled)
}

/// The `B` permuted statistics, bootstrap `b` seeded by `derive_seed(seed, b)`.
/// Runs in parallel; results are ordered by `b`.
pub fn permutation_null(x: &SurrogateSample, y: &SurrogateSample, n_permutations: usize, seed: u64) -> Result<Vec<f64>> {
    let n = x.values.n_rows();
    if y.values.n_rows() != n {
        return Err(Error::Data(format!("surrogates have {n} and {} rows", y.values.n_rows())));
    }
    if n_permutations == 0 {
        return Err(Error::Config("n_permutations must be at least 1".into()));
    }
    (0..n_permutations as u64)
        .into_par_iter()
        .map(|b| {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, b)));
            null_statistic(x, y, &perm)
        })
        .collect()
}

/// Trains the flows once, computes the statistic and its permutation null.
pub fn ci_test(data: &Dataset, cfg: &CITestConfig) -> Result<CITestResult> {
    cfg.validate()?;
    if data.z.n_cols() == 0 {
        return Err(Error::Config("ci_test needs d_Z ≥ 1".into()));
    }
    let s = fit_surrogates(data, &cfg.estimator)?;
    let statistic = surrogate_mi(&s.x.values, &s.y.values).stage("statistic")?;
    let permuted_stats = permutation_null(&s.x, &s.y, cfg.n_permutations, cfg.seed).stage("permutations")?;
    let p = p_value(statistic, &permuted_stats)?;
    Ok(CITestResult {
        statistic,
        p_value: p,
        decision: Decision::from_p_value(p, cfg.alpha),
        permuted_stats,
    })
}
