use super::check_alpha;
use crate::data::{Bag, Extended, LabeledPoint, PredictionInterval};
use crate::error::{Error, Result};
use crate::predictors::ridge_residual_affine;
use crate::quantile::WeightedScoreDistribution;
use crate::weights::{mfcs_dstep_weights, DensityEvaluator, WeightOptions, WeightVector};

/// Grid labels accepted by full CP, and their hull.
#[derive(Debug, Clone, PartialEq)]
pub struct FullCpSet {
    grid: Vec<f64>,
    included: Vec<bool>,
}

impl FullCpSet {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.included
    }

    pub fn labels(&self) -> Vec<f64> {
        self.grid
            .iter()
            .zip(&self.included)
            .filter_map(|(y, &inc)| inc.then_some(*y))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        !self.included.iter().any(|&b| b)
    }

    /// True when the accepted labels form one run of consecutive grid points.
    pub fn is_contiguous(&self) -> bool {
        let first = self.included.iter().position(|&b| b);
        let last = self.included.iter().rposition(|&b| b);
        match (first, last) {
            (Some(a), Some(b)) => self.included[a..=b].iter().all(|&v| v),
            _ => true,
        }
    }

    /// `[min, max]` of the accepted labels. An accepted grid endpoint opens
    /// that side to infinity, since the grid cannot see past it.
    pub fn hull(&self) -> Option<PredictionInterval> {
        let a = self.included.iter().position(|&b| b)?;
        let b = self.included.iter().rposition(|&b| b)?;
        let last = self.grid.len() - 1;
        let lower = if a == 0 {
            Extended::NegInf
        } else {
            Extended::Finite(self.grid[a])
        };
        let upper = if b == last {
            Extended::PosInf
        } else {
            Extended::Finite(self.grid[b])
        };
        PredictionInterval::new(lower, upper).ok()
    }

    pub fn covers(&self, y: f64) -> bool {
        self.hull().is_some_and(|h| h.contains(y))
    }

    pub fn width(&self) -> Extended {
        self.hull().map_or(Extended::Finite(0.0), |h| h.width())
    }
}

/// Full CP with the ridge absolute-residual score.
///
/// For every grid label `y`, the data are augmented with `(x_test, y)`,
/// residuals come from the affine closed form and `weights_for` supplies the
/// weights of the augmented points (test point last). `y` is accepted iff
/// the test residual is at most the weighted `1 - alpha` quantile.
pub fn full_cp_membership<W>(
    data: &Bag,
    x_test: &[f64],
    alpha: f64,
    grid: &[f64],
    regularization: f64,
    mut weights_for: W,
) -> Result<FullCpSet>
where
    W: FnMut(&[LabeledPoint]) -> Result<WeightVector>,
{
    check_alpha(alpha)?;
    if grid.is_empty() {
        return Err(Error::param("label grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("label grid must be strictly increasing"));
    }
    let affine = ridge_residual_affine(data, x_test, regularization)?;
    let n = data.len();
    let mut points = data.points().to_vec();
    points.push(LabeledPoint::new(x_test.to_vec(), grid[0]));
    let mut scores = vec![0.0; n];
    let mut included = Vec::with_capacity(grid.len());
    for &y in grid {
        points[n].y = y;
        let w = weights_for(&points)?;
        if w.len() != n + 1 {
            return Err(Error::shape(format!("{} weights", n + 1), w.len()));
        }
        for (s, r) in scores.iter_mut().zip(&affine) {
            *s = r.score(y);
        }
        let q = WeightedScoreDistribution::from_calibration(&scores, w.as_slice())?
            .quantile(1.0 - alpha)?;
        included.push(Extended::Finite(affine[n].score(y)) <= q);
    }
    Ok(FullCpSet {
        grid: grid.to_vec(),
        included,
    })
}

/// Full CP with depth-`d` weights from `evaluator`, which is conditioned on
/// bags that contain the test point at its imputed label.
#[allow(clippy::too_many_arguments)]
pub fn full_cp_set_ridge<E: DensityEvaluator>(
    data: &Bag,
    x_test: &[f64],
    evaluator: &E,
    d: usize,
    alpha: f64,
    grid: &[f64],
    regularization: f64,
    opts: &WeightOptions,
) -> Result<FullCpSet> {
    full_cp_membership(data, x_test, alpha, grid, regularization, |pts| {
        mfcs_dstep_weights(pts, evaluator, d, opts)
    })
}
