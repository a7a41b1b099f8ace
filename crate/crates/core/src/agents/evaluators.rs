use std::sync::Arc;

use super::pool::Pool;
use super::query::{bounded_query, softmax_query, QueryDistribution};
use crate::data::LabeledPoint;
use crate::error::{Error, Result};
use crate::predictors::{Regressor, RidgeModel, SufficientStats};
use crate::weights::{DensityEvaluator, QueryDensity};

/// Probabilities over a pool, looked up by covariate.
#[derive(Debug, Clone)]
pub struct PoolDensity {
    pool: Arc<Pool>,
    probs: Arc<Vec<f64>>,
}

impl PoolDensity {
    pub fn new(pool: Arc<Pool>, probs: Arc<Vec<f64>>) -> Self {
        Self { pool, probs }
    }

    pub fn uniform(pool: Arc<Pool>) -> Self {
        let n = pool.len();
        Self::new(pool, Arc::new(vec![1.0 / n as f64; n]))
    }
}

impl QueryDensity for PoolDensity {
    fn density(&self, x: &[f64]) -> f64 {
        self.pool.index_of(x).map_or(0.0, |i| self.probs[i])
    }
}

/// Split-CP evaluator that replays the query distributions actually used.
///
/// Calibration bags only grow, one query at a time, so a bag of `m` points
/// identifies the step at which the next calibration point was drawn.
/// `p(x | bag)` is the query distribution recorded for size `len(bag)`;
/// sizes before the first query fall back to the uniform initialization.
#[derive(Debug, Clone)]
pub struct CalibrationHistoryEvaluator {
    pool: Arc<Pool>,
    history: Vec<Option<Arc<Vec<f64>>>>,
}

impl CalibrationHistoryEvaluator {
    pub fn new(pool: Arc<Pool>) -> Self {
        Self {
            pool,
            history: Vec::new(),
        }
    }

    pub fn pool(&self) -> &Arc<Pool> {
        &self.pool
    }

    /// Records the distribution in force while the calibration set has `size`
    /// points.
    pub fn record(&mut self, size: usize, dist: &QueryDistribution) -> Result<()> {
        if dist.probs().len() != self.pool.len() {
            return Err(Error::shape(
                format!("{} probabilities", self.pool.len()),
                dist.probs().len(),
            ));
        }
        if self.history.len() <= size {
            self.history.resize(size + 1, None);
        }
        self.history[size] = Some(Arc::new(dist.probs().to_vec()));
        Ok(())
    }
}

impl DensityEvaluator for CalibrationHistoryEvaluator {
    type Conditioned = PoolDensity;

    fn condition(&self, conditioning: &[&LabeledPoint]) -> Result<PoolDensity> {
        Ok(match self.history.get(conditioning.len()) {
            Some(Some(probs)) => PoolDensity::new(self.pool.clone(), probs.clone()),
            _ => PoolDensity::uniform(self.pool.clone()),
        })
    }
}

/// Which labels a [`RefitEvaluator`] fits its utility model on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefitLabels {
    /// The observed noisy labels carried by the bag.
    #[default]
    Noisy,
    /// The pool's noiseless labels, looked up by covariate.
    Noiseless,
}

/// Full-CP evaluator: refits ridge regression on the conditioning bag and
/// returns the softmax (optionally bounded) proposal over the pool.
#[derive(Debug, Clone)]
pub struct RefitEvaluator {
    pub pool: Arc<Pool>,
    pub lambda: f64,
    pub regularization: f64,
    /// Bags smaller than this were drawn by the uniform initialization.
    pub initial_size: usize,
    /// Miscoverage level of the bounded proposal, if bounded.
    pub bounded_alpha: Option<f64>,
    pub labels: RefitLabels,
}

impl RefitEvaluator {
    /// The proposal after training on `conditioning`, and whether a bounded
    /// proposal had to fall back to the unbounded one.
    pub fn query_distribution(
        &self,
        conditioning: &[&LabeledPoint],
    ) -> Result<(QueryDistribution, bool)> {
        let dim = self.pool.dim();
        let mut stats = SufficientStats::new(dim);
        for p in conditioning {
            let y = match self.labels {
                RefitLabels::Noisy => p.y,
                RefitLabels::Noiseless => {
                    let i = self.pool.index_of(&p.x).ok_or_else(|| {
                        Error::param("noiseless labels need every point to be in the pool")
                    })?;
                    self.pool.label(i)
                }
            };
            stats.add(&LabeledPoint::new(p.x.clone(), y))?;
        }
        let model = RidgeModel::from_stats(&stats, self.regularization)?;
        let utilities: Vec<f64> = self
            .pool
            .candidates()
            .iter()
            .map(|c| model.predict(c))
            .collect();
        match self.bounded_alpha {
            None => Ok((softmax_query(&utilities, self.lambda)?, false)),
            Some(alpha) => {
                let cal: Vec<f64> = conditioning.iter().map(|p| model.predict(&p.x)).collect();
                match bounded_query(&utilities, &cal, self.lambda, alpha) {
                    Ok(q) => Ok((q, false)),
                    Err(Error::BoundInfeasible { .. }) => {
                        Ok((softmax_query(&utilities, self.lambda)?, true))
                    }
                    Err(e) => Err(e),
                }
            }
        }
    }
}

impl DensityEvaluator for RefitEvaluator {
    type Conditioned = PoolDensity;

    fn condition(&self, conditioning: &[&LabeledPoint]) -> Result<PoolDensity> {
        if conditioning.len() < self.initial_size {
            return Ok(PoolDensity::uniform(self.pool.clone()));
        }
        let (q, _) = self.query_distribution(conditioning)?;
        Ok(PoolDensity::new(self.pool.clone(), Arc::new(q.into_probs())))
    }
}
