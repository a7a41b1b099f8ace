//! Regressors used as score functions and as agent utility sources.
//!
//! Both models are linear in a fixed feature map, so they share
//! [`SufficientStats`]: fitting is a function of `sum phi phi^T` and
//! `sum phi y`, which makes every fit invariant to the order of its training
//! bag up to floating-point summation order.

mod gp;
mod ridge;

pub use gp::{gp_fit_predict, GaussianProcessModel, GpKernel};
pub use ridge::{ridge_residual_affine, AffineResidual, RidgeModel};

use serde::{Deserialize, Serialize};

use crate::data::{Bag, LabeledPoint};
use crate::error::{Error, Result};

/// Anything that produces a point prediction.
pub trait Regressor {
    fn predict(&self, x: &[f64]) -> f64;
}

/// Which regressor a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorKind {
    Ridge,
    Gp,
}

/// Accumulated `sum z z^T` and `sum z y` for `z = [1, x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    dim: usize,
    count: usize,
    /// `(dim + 1)^2`, row-major, over the augmented vector `[1, x]`.
    gram: Vec<f64>,
    /// `dim + 1` entries.
    moment: Vec<f64>,
}

impl SufficientStats {
    pub fn new(dim: usize) -> Self {
        let a = dim + 1;
        Self {
            dim,
            count: 0,
            gram: vec![0.0; a * a],
            moment: vec![0.0; a],
        }
    }

    pub fn from_points<'a, I>(dim: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a LabeledPoint>,
    {
        let mut s = Self::new(dim);
        for p in points {
            s.add(p)?;
        }
        Ok(s)
    }

    pub fn from_bag(bag: &Bag, dim: usize) -> Result<Self> {
        Self::from_points(dim, bag.iter())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn add(&mut self, p: &LabeledPoint) -> Result<()> {
        self.add_weighted(&p.x, p.y, 1.0)
    }

    /// Adds (`sign = 1`) or removes (`sign = -1`) one observation.
    fn add_weighted(&mut self, x: &[f64], y: f64, sign: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::shape(format!("dimension {}", self.dim), x.len()));
        }
        let a = self.dim + 1;
        let z = |i: usize| if i == 0 { 1.0 } else { x[i - 1] };
        for i in 0..a {
            let zi = z(i);
            self.moment[i] += sign * zi * y;
            for j in 0..a {
                self.gram[i * a + j] += sign * zi * z(j);
            }
        }
        if sign > 0.0 {
            self.count += 1;
        } else {
            self.count -= 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &SufficientStats) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::shape(format!("dimension {}", self.dim), other.dim));
        }
        for (a, b) in self.gram.iter_mut().zip(&other.gram) {
            *a += b;
        }
        for (a, b) in self.moment.iter_mut().zip(&other.moment) {
            *a += b;
        }
        self.count += other.count;
        Ok(())
    }

    /// `X^T X` without the constant column.
    pub(crate) fn feature_gram(&self) -> Vec<f64> {
        let a = self.dim + 1;
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 1..a {
            out.extend_from_slice(&self.gram[i * a + 1..(i + 1) * a]);
        }
        out
    }

    /// `X^T y` without the constant column.
    pub(crate) fn feature_moment(&self) -> &[f64] {
        &self.moment[1..]
    }

    pub(crate) fn augmented_gram(&self) -> &[f64] {
        &self.gram
    }

    pub(crate) fn augmented_moment(&self) -> &[f64] {
        &self.moment
    }
}
