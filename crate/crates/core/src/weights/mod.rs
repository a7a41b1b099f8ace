//! Conformal probability weights for the calibration points and the test
//! point.
//!
//! Three routes are provided:
//!
//! * [`brute_force_weights`] enumerates every permutation of the points under
//!   an arbitrary joint density. Factorial time; used as the oracle.
//! * [`mfcs_exact_weights`] uses the multistep feedback covariate shift
//!   factorization: the label factors cancel and only the query-density
//!   factors of the `t` dynamic steps remain.
//! * [`mfcs_dstep_weights`] keeps only the `d` most recent dynamic factors and
//!   evaluates them with a nested recursion over excluded index sets.
//!
//! Weight vectors are indexed like the input points; by convention the test
//! point is the last entry.

mod brute;
mod cache;
mod evaluator;
mod mfcs;
mod vector;

pub use brute::{brute_force_weights, JointDensity, LabelDensity, MfcsJointDensity};
pub use evaluator::{ConstantDensity, DensityEvaluator, FnDensity, QueryDensity, UniformEvaluator};
pub use mfcs::{
    dstep_evaluation_count, mfcs_dstep_weights, mfcs_dstep_weights_with_stats,
    mfcs_exact_weights, mfcs_exact_weights_with_stats, InitialDensity,
};
pub use vector::WeightVector;

/// Work caps for the weight computations.
#[derive(Debug, Clone, Copy)]
pub struct WeightOptions {
    /// Largest number of points `brute_force_weights` will enumerate.
    pub max_brute_force_points: usize,
    /// Largest number of evaluator queries the MFCS routines will issue.
    pub max_evaluations: u128,
}

impl Default for WeightOptions {
    fn default() -> Self {
        Self {
            max_brute_force_points: 8,
            max_evaluations: 100_000_000,
        }
    }
}

/// Instrumentation returned alongside a weight vector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WeightStats {
    /// Complete density products formed, one per ordered index path. Each
    /// product ends in exactly one innermost evaluator query.
    pub evaluator_calls: u64,
    /// Distinct conditioning bags that had to be conditioned on.
    pub distinct_bags: usize,
}
