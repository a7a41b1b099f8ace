use super::{Regressor, SufficientStats};
use crate::data::Bag;
use crate::error::{Error, Result};
use crate::numeric::{dot, Cholesky};

/// `k(x, x') = sigma0^2 + x.x'` plus white noise of variance `noise_level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpKernel {
    pub sigma0: f64,
    pub noise_level: f64,
}

impl Default for GpKernel {
    fn default() -> Self {
        Self {
            sigma0: 0.05,
            noise_level: 0.05,
        }
    }
}

impl GpKernel {
    pub fn prior_variance(&self, x: &[f64]) -> f64 {
        self.sigma0 * self.sigma0 + dot(x, x)
    }
}

/// Zero-mean GP regression with a dot-product kernel and fixed
/// hyperparameters.
///
/// The dot-product kernel is the covariance of a linear model
/// `f(x) = w0 * sigma0 + w.x` with standard normal weights, so the posterior
/// is computed in that `(dim + 1)`-dimensional weight space.
#[derive(Debug, Clone)]
pub struct GaussianProcessModel {
    kernel: GpKernel,
    dim: usize,
    precision: Cholesky,
    mean_weights: Vec<f64>,
}

impl GaussianProcessModel {
    pub fn fit(data: &Bag, dim: usize, kernel: GpKernel) -> Result<Self> {
        if let Some(d) = data.dim() {
            if d != dim {
                return Err(Error::shape(format!("dimension {dim}"), d));
            }
        }
        Self::from_stats(&SufficientStats::from_bag(data, dim)?, kernel)
    }

    pub fn from_stats(stats: &SufficientStats, kernel: GpKernel) -> Result<Self> {
        if !(kernel.noise_level > 0.0) {
            return Err(Error::param("white-noise level must be positive"));
        }
        let dim = stats.dim();
        let a = dim + 1;
        let s0 = kernel.sigma0;
        let inv_noise = 1.0 / kernel.noise_level;
        let scale = |i: usize| if i == 0 { s0 } else { 1.0 };
        let gram = stats.augmented_gram();
        let mut precision = vec![0.0; a * a];
        for i in 0..a {
            for j in 0..a {
                precision[i * a + j] = scale(i) * scale(j) * gram[i * a + j] * inv_noise;
            }
            precision[i * a + i] += 1.0;
        }
        let chol = Cholesky::factor_with_jitter(&precision, a)?;
        let rhs: Vec<f64> = stats
            .augmented_moment()
            .iter()
            .enumerate()
            .map(|(i, m)| scale(i) * m * inv_noise)
            .collect();
        let mean_weights = chol.solve(&rhs);
        Ok(Self {
            kernel,
            dim,
            precision: chol,
            mean_weights,
        })
    }

    fn features(&self, x: &[f64]) -> Vec<f64> {
        let mut phi = Vec::with_capacity(self.dim + 1);
        phi.push(self.kernel.sigma0);
        phi.extend_from_slice(x);
        phi
    }

    pub fn kernel(&self) -> GpKernel {
        self.kernel
    }

    /// Posterior mean and latent-function variance at `query`.
    pub fn predict_mean_var(&self, query: &[f64]) -> (f64, f64) {
        let phi = self.features(query);
        let mean = dot(&phi, &self.mean_weights);
        let var = self.precision.inverse_quadratic_form(&phi).max(0.0);
        (mean, var)
    }

    pub fn posterior_variance(&self, query: &[f64]) -> f64 {
        self.precision
            .inverse_quadratic_form(&self.features(query))
            .max(0.0)
    }
}

impl Regressor for GaussianProcessModel {
    fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.features(x), &self.mean_weights)
    }
}

/// Fits on `data` and returns `(mean, variance)` at `query`.
pub fn gp_fit_predict(data: &Bag, query: &[f64], kernel: GpKernel) -> Result<(f64, f64)> {
    let model = GaussianProcessModel::fit(data, query.len(), kernel)?;
    Ok(model.predict_mean_var(query))
}
