use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::quantile::MASS_TOLERANCE;

/// Normalized nonnegative weights, one per point (calibration points first,
/// test point last).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    /// Normalizes nonnegative masses to sum to one.
    pub fn from_unnormalized(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::param("empty weight vector"));
        }
        for &m in &masses {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::Numerical(format!("invalid unnormalized weight {m}")));
            }
        }
        let total = compensated_sum(masses.iter().copied());
        if total <= 0.0 {
            return Err(Error::DegenerateDensity);
        }
        if !total.is_finite() {
            return Err(Error::Numerical("weight total overflowed".into()));
        }
        Ok(Self {
            weights: masses.into_iter().map(|m| m / total).collect(),
        })
    }

    /// Wraps weights that are already normalized.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("empty weight vector"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::param("negative weight"));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::param(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    /// `1/m` on each of `m` points.
    pub fn uniform(m: usize) -> Self {
        assert!(m > 0, "uniform weights need at least one point");
        Self {
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of the last point (the test point).
    pub fn test_weight(&self) -> f64 {
        *self.weights.last().expect("nonempty")
    }

    pub fn max_abs_diff(&self, other: &WeightVector) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}
