//! Query distributions of the learning agent over a finite candidate pool.

mod evaluators;
mod pool;
mod query;

pub use evaluators::{CalibrationHistoryEvaluator, PoolDensity, RefitEvaluator, RefitLabels};
pub use pool::Pool;
pub use query::{bounded_query, sample_query, softmax_query, QueryDistribution};
