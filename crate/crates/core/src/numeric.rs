//! Small numerical helpers: compensated summation, dense Cholesky solves and
//! log-sum-exp.

use crate::error::{Error, Result};

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().total()
}

/// `log(sum(exp(v)))` with max-shift.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s = compensated_sum(values.iter().map(|v| (v - max).exp()));
    max + s.ln()
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix
/// stored row-major in a `dim * dim` slice.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

const JITTER: f64 = 1e-10;

impl Cholesky {
    /// Factorizes `matrix`; on failure retries once with `1e-10 * I` added.
    pub fn factor_with_jitter(matrix: &[f64], dim: usize) -> Result<Self> {
        match Self::factor(matrix, dim) {
            Ok(c) => Ok(c),
            Err(_) => {
                let mut jittered = matrix.to_vec();
                for i in 0..dim {
                    jittered[i * dim + i] += JITTER;
                }
                Self::factor(&jittered, dim).map_err(|e| {
                    let diag_min = (0..dim)
                        .map(|i| matrix[i * dim + i])
                        .fold(f64::INFINITY, f64::min);
                    let diag_max = (0..dim)
                        .map(|i| matrix[i * dim + i])
                        .fold(f64::NEG_INFINITY, f64::max);
                    Error::Numerical(format!(
                        "{e} after jitter {JITTER:e}; diagonal range [{diag_min:e}, {diag_max:e}]"
                    ))
                })
            }
        }
    }

    pub fn factor(matrix: &[f64], dim: usize) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::shape(dim * dim, matrix.len()));
        }
        let mut lower = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let mut s = matrix[i * dim + j];
                for k in 0..j {
                    s -= lower[i * dim + k] * lower[j * dim + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Numerical(format!(
                            "matrix not positive definite at pivot {i} (value {s:e})"
                        )));
                    }
                    lower[i * dim + i] = s.sqrt();
                } else {
                    lower[i * dim + j] = s / lower[j * dim + j];
                }
            }
        }
        Ok(Self { dim, lower })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves `L z = b` in place.
    pub fn forward_substitute(&self, b: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let s = row.iter().zip(&b[..i]).fold(b[i], |s, (l, bk)| s - l * bk);
            b[i] = s / self.lower[i * n + i];
        }
    }

    /// Solves `L^T z = b` in place.
    pub fn backward_substitute(&self, b: &mut [f64]) {
        let n = self.dim;
        for i in (0..n).rev() {
            let mut s = b[i];
            for (k, bk) in b.iter().enumerate().skip(i + 1) {
                s -= self.lower[k * n + i] * bk;
            }
            b[i] = s / self.lower[i * n + i];
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward_substitute(&mut x);
        self.backward_substitute(&mut x);
        x
    }

    /// Computes `b^T A^{-1} b`.
    pub fn inverse_quadratic_form(&self, b: &[f64]) -> f64 {
        let mut z = b.to_vec();
        self.forward_substitute(&mut z);
        z.iter().map(|v| v * v).sum()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
