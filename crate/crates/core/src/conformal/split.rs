use super::check_alpha;
use crate::data::{Bag, LabeledPoint, PredictionInterval};
use crate::error::{Error, Result};
use crate::predictors::Regressor;
use crate::quantile::{interval_from_residual_quantile, WeightedScoreDistribution};
use crate::weights::{mfcs_dstep_weights, DensityEvaluator, WeightOptions, WeightVector};

/// A model fit on the proper training set together with the calibration
/// points and their absolute residuals under that model.
#[derive(Debug, Clone)]
pub struct SplitCalibrationState<R> {
    model: R,
    calibration: Bag,
    scores: Vec<f64>,
}

impl<R: Regressor> SplitCalibrationState<R> {
    pub fn new(model: R, calibration: Bag) -> Self {
        let scores = calibration
            .iter()
            .map(|p| (p.y - model.predict(&p.x)).abs())
            .collect();
        Self {
            model,
            calibration,
            scores,
        }
    }

    pub fn model(&self) -> &R {
        &self.model
    }

    pub fn calibration(&self) -> &Bag {
        &self.calibration
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Calibration points followed by the test covariate.
    ///
    /// The test label is unknown; it is set to zero and must not influence
    /// the evaluator.
    pub fn points_with_test(&self, x_test: &[f64]) -> Vec<LabeledPoint> {
        let mut pts = self.calibration.points().to_vec();
        pts.push(LabeledPoint::new(x_test.to_vec(), 0.0));
        pts
    }
}

/// `mu(x_test) ± q`, where `q` is the `1 - alpha` quantile of the calibration
/// scores weighted by `weights` plus the test weight placed at infinity.
pub fn split_cp_interval<R: Regressor>(
    state: &SplitCalibrationState<R>,
    x_test: &[f64],
    weights: &WeightVector,
    alpha: f64,
) -> Result<PredictionInterval> {
    check_alpha(alpha)?;
    if weights.len() != state.scores.len() + 1 {
        return Err(Error::shape(
            format!("{} weights", state.scores.len() + 1),
            weights.len(),
        ));
    }
    let dist = WeightedScoreDistribution::from_calibration(&state.scores, weights.as_slice())?;
    let q = dist.quantile(1.0 - alpha)?;
    interval_from_residual_quantile(state.model.predict(x_test), q)
}

pub fn standard_split_interval<R: Regressor>(
    state: &SplitCalibrationState<R>,
    x_test: &[f64],
    alpha: f64,
) -> Result<PredictionInterval> {
    let w = WeightVector::uniform(state.scores.len() + 1);
    split_cp_interval(state, x_test, &w, alpha)
}

/// Split CP with depth-`d` weights over the calibration points and the test
/// point.
pub fn mfcs_split_interval<R: Regressor, E: DensityEvaluator>(
    state: &SplitCalibrationState<R>,
    x_test: &[f64],
    evaluator: &E,
    d: usize,
    alpha: f64,
    opts: &WeightOptions,
) -> Result<PredictionInterval> {
    let w = mfcs_dstep_weights(&state.points_with_test(x_test), evaluator, d, opts)?;
    split_cp_interval(state, x_test, &w, alpha)
}

pub fn one_step_fcs_interval<R: Regressor, E: DensityEvaluator>(
    state: &SplitCalibrationState<R>,
    x_test: &[f64],
    evaluator: &E,
    alpha: f64,
) -> Result<PredictionInterval> {
    mfcs_split_interval(state, x_test, evaluator, 1, alpha, &WeightOptions::default())
}
