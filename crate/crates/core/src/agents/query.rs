use rand::Rng;

use crate::error::{Error, Result};

/// Normalized sampling probabilities over pool indices.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryDistribution {
    probs: Vec<f64>,
    lambda: f64,
    log_bound: Option<f64>,
    bound_relative: Option<f64>,
}

impl QueryDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The cap `B` on `exp(lambda * u)`, when the proposal is bounded.
    pub fn bound(&self) -> Option<f64> {
        self.log_bound.map(f64::exp)
    }

    pub fn log_bound(&self) -> Option<f64> {
        self.log_bound
    }

    /// `B` divided by the largest unbounded pool value.
    pub fn bound_relative(&self) -> Option<f64> {
        self.bound_relative
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

fn scaled(utilities: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::param(format!("lambda {lambda} must be finite and nonnegative")));
    }
    if utilities.iter().any(|u| !u.is_finite()) {
        return Err(Error::param("utilities must be finite"));
    }
    Ok(utilities.iter().map(|u| lambda * u).collect())
}

fn normalize(masses: Vec<f64>) -> Vec<f64> {
    let total: f64 = masses.iter().sum();
    masses.into_iter().map(|m| m / total).collect()
}

/// `probs[i] ∝ exp(lambda * u_i)`.
pub fn softmax_query(utilities: &[f64], lambda: f64) -> Result<QueryDistribution> {
    if utilities.is_empty() {
        return Err(Error::param("empty pool"));
    }
    let s = scaled(utilities, lambda)?;
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(QueryDistribution {
        probs: normalize(s.iter().map(|v| (v - max).exp()).collect()),
        lambda,
        log_bound: None,
        bound_relative: None,
    })
}

/// Softmax proposal with `exp(lambda * u)` capped at the largest pool value
/// `B` for which `B / (sum_cal min(exp(lambda * u_i), B) + B) < alpha`.
///
/// Any pool point then has one-step test weight below `alpha` against the
/// given calibration utilities.
pub fn bounded_query(
    utilities: &[f64],
    cal_utilities: &[f64],
    lambda: f64,
    alpha: f64,
) -> Result<QueryDistribution> {
    if utilities.is_empty() {
        return Err(Error::param("empty pool"));
    }
    if cal_utilities.is_empty() {
        return Err(Error::param("bounded query needs a nonempty calibration set"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha {alpha} outside (0, 1)")));
    }
    let pool = scaled(utilities, lambda)?;
    let cal = scaled(cal_utilities, lambda)?;
    let shift = pool
        .iter()
        .chain(&cal)
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let pool_v: Vec<f64> = pool.iter().map(|v| (v - shift).exp()).collect();
    let cal_v: Vec<f64> = cal.iter().map(|v| (v - shift).exp()).collect();

    let test_weight = |b: f64, v: f64| -> f64 {
        let capped = v.min(b);
        let s: f64 = cal_v.iter().map(|c| c.min(b)).sum();
        capped / (s + capped)
    };
    let mut sorted = pool.clone();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let ok = |log_b: f64| {
        let b = (log_b - shift).exp();
        test_weight(b, b) < alpha
    };
    if !ok(sorted[0]) {
        return Err(Error::BoundInfeasible {
            smallest: sorted[0].exp(),
        });
    }
    // The constraint is monotone in b: find the last feasible sorted value.
    let (mut lo, mut hi) = (0usize, sorted.len());
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(sorted[mid]) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let log_bound = sorted[lo];
    let b = (log_bound - shift).exp();
    for &v in &pool_v {
        if !(test_weight(b, v) < alpha) {
            return Err(Error::Numerical(format!(
                "bounded proposal violates the one-step weight constraint at value {v}"
            )));
        }
    }
    let max_pool = *sorted.last().expect("nonempty pool");
    Ok(QueryDistribution {
        probs: normalize(pool_v.iter().map(|v| v.min(b)).collect()),
        lambda,
        log_bound: Some(log_bound),
        bound_relative: Some((log_bound - max_pool).exp()),
    })
}

/// Inverse-CDF draw of a pool index.
pub fn sample_query<R: Rng + ?Sized>(dist: &QueryDistribution, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &p) in dist.probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        cumulative += p;
        if u < cumulative {
            return i;
        }
    }
    last_positive
}
