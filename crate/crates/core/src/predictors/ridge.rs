use super::{Regressor, SufficientStats};
use crate::data::{Bag, LabeledPoint};
use crate::error::{Error, Result};
use crate::numeric::{dot, Cholesky};

/// Linear ridge regression without intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    coefficients: Vec<f64>,
    regularization: f64,
}

impl RidgeModel {
    /// Minimizes `sum (y - w.x)^2 + regularization * |w|^2`.
    pub fn fit(data: &Bag, regularization: f64) -> Result<Self> {
        let dim = data
            .dim()
            .ok_or_else(|| Error::param("cannot fit ridge regression on an empty bag"))?;
        let stats = SufficientStats::from_bag(data, dim)?;
        Self::from_stats(&stats, regularization)
    }

    pub fn from_stats(stats: &SufficientStats, regularization: f64) -> Result<Self> {
        if !(regularization > 0.0) || !regularization.is_finite() {
            return Err(Error::param(format!(
                "ridge regularization {regularization} must be positive"
            )));
        }
        if stats.count() == 0 {
            return Err(Error::param("cannot fit ridge regression on an empty bag"));
        }
        let dim = stats.dim();
        let mut a = stats.feature_gram();
        for i in 0..dim {
            a[i * dim + i] += regularization;
        }
        let chol = Cholesky::factor_with_jitter(&a, dim)?;
        Ok(Self {
            coefficients: chol.solve(stats.feature_moment()),
            regularization,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }
}

impl Regressor for RidgeModel {
    fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.coefficients, x)
    }
}

/// Residual of one point as an affine function of the imputed test label:
/// `residual(y) = a + b * y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineResidual {
    pub a: f64,
    pub b: f64,
}

impl AffineResidual {
    pub fn at(&self, y: f64) -> f64 {
        self.a + self.b * y
    }

    /// Absolute-residual score at label `y`.
    pub fn score(&self, y: f64) -> f64 {
        self.at(y).abs()
    }
}

/// Residuals of every point after refitting ridge regression on
/// `data ∪ {(x_test, y)}`, as affine functions of `y`.
///
/// Entries `0..n` are the data points in bag order; entry `n` is the test
/// point. One factorization serves every candidate label.
pub fn ridge_residual_affine(
    data: &Bag,
    x_test: &[f64],
    regularization: f64,
) -> Result<Vec<AffineResidual>> {
    let dim = x_test.len();
    if let Some(d) = data.dim() {
        if d != dim {
            return Err(Error::shape(format!("dimension {d}"), dim));
        }
    }
    if !(regularization >= 0.0) {
        return Err(Error::param(format!(
            "ridge regularization {regularization} must be nonnegative"
        )));
    }
    let mut stats = SufficientStats::from_bag(data, dim)?;
    stats.add(&LabeledPoint::new(x_test.to_vec(), 0.0))?;
    let mut a = stats.feature_gram();
    for i in 0..dim {
        a[i * dim + i] += regularization;
    }
    let chol = Cholesky::factor(&a, dim).map_err(|e| {
        Error::Numerical(format!("augmented ridge system is singular ({e})"))
    })?;
    // The test label enters X^T y only through x_test * y.
    let base = chol.solve(stats.feature_moment());
    let lever = chol.solve(x_test);
    let mut out: Vec<AffineResidual> = data
        .iter()
        .map(|p| AffineResidual {
            a: p.y - dot(&p.x, &base),
            b: -dot(&p.x, &lever),
        })
        .collect();
    out.push(AffineResidual {
        a: -dot(x_test, &base),
        b: 1.0 - dot(x_test, &lever),
    });
    Ok(out)
}
