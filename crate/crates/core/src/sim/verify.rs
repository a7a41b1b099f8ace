//! Cross-check of the three weight computations on random instances.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::agents::{Pool, RefitEvaluator, RefitLabels};
use crate::data::LabeledPoint;
use crate::error::{Error, Result};
use crate::weights::{
    brute_force_weights, dstep_evaluation_count, mfcs_dstep_weights_with_stats,
    mfcs_exact_weights, MfcsJointDensity, WeightOptions,
};

/// A random feedback-loop instance: a small candidate pool, a softmax agent
/// that refits ridge regression on everything it has seen, and `n + t`
/// observed points.
pub struct RandomInstance {
    pub evaluator: RefitEvaluator,
    pub points: Vec<LabeledPoint>,
    pub n: usize,
    pub t: usize,
}

pub fn random_instance(n: usize, t: usize, seed: u64) -> Result<RandomInstance> {
    if n < 1 || t < 1 {
        return Err(Error::param("instances need n >= 1 and t >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = 10;
    let dim = 2;
    let candidates: Vec<Vec<f64>> = (0..size)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let labels: Vec<f64> = (0..size).map(|_| rng.sample(StandardNormal)).collect();
    let pool = Arc::new(Pool::new(candidates, labels, vec![0.0; size])?);
    let evaluator = RefitEvaluator {
        pool: pool.clone(),
        lambda: rng.random_range(0.5..3.0),
        regularization: 0.1,
        initial_size: 1,
        bounded_alpha: None,
        labels: RefitLabels::Noisy,
    };
    let points = (0..n + t)
        .map(|_| {
            let i = rng.random_range(0..size);
            let noise: f64 = rng.sample(StandardNormal);
            LabeledPoint::new(pool.candidate(i).to_vec(), pool.label(i) + 0.3 * noise)
        })
        .collect();
    Ok(RandomInstance {
        evaluator,
        points,
        n,
        t,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthTiming {
    pub d: usize,
    pub evaluator_calls: u64,
    pub expected_calls: u128,
    pub wall_ms: f64,
    /// Largest deviation from the exact weights over all trials.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub trials: usize,
    /// Brute force against exact weights.
    pub brute_vs_exact: f64,
    /// Depth-`t` recursion against exact weights.
    pub dstep_vs_exact: f64,
    pub depths: Vec<DepthTiming>,
}

impl VerifyReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.brute_vs_exact <= tolerance && self.dstep_vs_exact <= tolerance
    }
}

/// Runs `trials` instances seeded from `seed`.
pub fn verify_weights(
    n: usize,
    t: usize,
    depths: &[usize],
    trials: usize,
    seed: u64,
) -> Result<VerifyReport> {
    let m = n + t;
    let opts = WeightOptions::default();
    let factorial: u128 = (1..=m as u128).product();
    if factorial > 5040 {
        return Err(Error::Complexity {
            work: factorial,
            cap: 5040,
            hint: "the permutation oracle needs (n + t)! <= 5040".into(),
        });
    }
    let brute_opts = WeightOptions {
        max_brute_force_points: m,
        ..opts
    };
    if let Some(&d) = depths.iter().find(|&&d| d < 1 || d > m) {
        return Err(Error::param(format!("depth {d} outside [1, {m}]")));
    }
    let mut report = VerifyReport {
        trials,
        brute_vs_exact: 0.0,
        dstep_vs_exact: 0.0,
        depths: depths
            .iter()
            .map(|&d| DepthTiming {
                d,
                evaluator_calls: 0,
                expected_calls: dstep_evaluation_count(m, d),
                wall_ms: 0.0,
                max_deviation: 0.0,
            })
            .collect(),
    };
    for trial in 0..trials {
        let inst = random_instance(n, t, seed.wrapping_add(trial as u64))?;
        let joint = MfcsJointDensity {
            evaluator: &inst.evaluator,
            initial_count: n,
            initial: None,
            label: None,
        };
        let brute = brute_force_weights(&inst.points, &joint, &brute_opts)?;
        let exact = mfcs_exact_weights(&inst.points, &inst.evaluator, n, t, None, &opts)?;
        let (full, _) = mfcs_dstep_weights_with_stats(&inst.points, &inst.evaluator, t, &opts)?;
        report.brute_vs_exact = report.brute_vs_exact.max(brute.max_abs_diff(&exact));
        report.dstep_vs_exact = report.dstep_vs_exact.max(full.max_abs_diff(&exact));
        for row in &mut report.depths {
            let start = Instant::now();
            let (w, stats) =
                mfcs_dstep_weights_with_stats(&inst.points, &inst.evaluator, row.d, &opts)?;
            row.wall_ms += start.elapsed().as_secs_f64() * 1e3;
            row.evaluator_calls = stats.evaluator_calls;
            row.max_deviation = row.max_deviation.max(w.max_abs_diff(&exact));
        }
    }
    Ok(report)
}
