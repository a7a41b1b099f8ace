use std::collections::HashMap;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

fn key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| (v + 0.0).to_bits()).collect()
}

/// Finite set of distinct candidates with hidden true labels.
#[derive(Debug, Clone)]
pub struct Pool {
    candidates: Vec<Vec<f64>>,
    labels: Vec<f64>,
    noise_sd: Vec<f64>,
    index: HashMap<Vec<u64>, usize>,
}

impl Pool {
    pub fn new(candidates: Vec<Vec<f64>>, labels: Vec<f64>, noise_sd: Vec<f64>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::param("pool is empty"));
        }
        if labels.len() != candidates.len() {
            return Err(Error::shape(format!("{} labels", candidates.len()), labels.len()));
        }
        if noise_sd.len() != candidates.len() {
            return Err(Error::shape(
                format!("{} noise levels", candidates.len()),
                noise_sd.len(),
            ));
        }
        if noise_sd.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::param("noise standard deviations must be nonnegative"));
        }
        let dim = candidates[0].len();
        let mut index = HashMap::with_capacity(candidates.len());
        for (i, c) in candidates.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::shape(format!("dimension {dim}"), c.len()));
            }
            if index.insert(key(c), i).is_some() {
                return Err(Error::param(format!("candidate {i} is a duplicate")));
            }
        }
        Ok(Self {
            candidates,
            labels,
            noise_sd,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.candidates[0].len()
    }

    pub fn candidates(&self) -> &[Vec<f64>] {
        &self.candidates
    }

    pub fn candidate(&self, i: usize) -> &[f64] {
        &self.candidates[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn noise_sd(&self, i: usize) -> f64 {
        self.noise_sd[i]
    }

    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        self.index.get(&key(x)).copied()
    }

    /// True label plus Gaussian noise.
    pub fn observe<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.labels[i] + self.noise_sd[i] * z
    }

    /// Pool restricted to `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.candidates[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
            indices.iter().map(|&i| self.noise_sd[i]).collect(),
        )
    }
}
