use crate::data::{Bag, LabeledPoint};
use crate::error::Result;

/// A query density already conditioned on a bag of observations.
pub trait QueryDensity {
    fn density(&self, x: &[f64]) -> f64;
}

/// Produces the agent's query density `p(x | conditioning)`.
///
/// Implementations must treat the conditioning points as a multiset: the
/// result may not depend on their order.
pub trait DensityEvaluator {
    type Conditioned: QueryDensity;

    fn condition(&self, conditioning: &[&LabeledPoint]) -> Result<Self::Conditioned>;

    /// One-shot `p(x | conditioning)`.
    fn eval(&self, x: &[f64], conditioning: &Bag) -> Result<f64> {
        let refs: Vec<&LabeledPoint> = conditioning.iter().collect();
        Ok(self.condition(&refs)?.density(x))
    }
}

/// Density that ignores its argument.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDensity(pub f64);

impl QueryDensity for ConstantDensity {
    fn density(&self, _x: &[f64]) -> f64 {
        self.0
    }
}

/// Uniform query distribution over a pool of `pool_size` candidates.
#[derive(Debug, Clone, Copy)]
pub struct UniformEvaluator {
    pub pool_size: usize,
}

impl DensityEvaluator for UniformEvaluator {
    type Conditioned = ConstantDensity;

    fn condition(&self, _conditioning: &[&LabeledPoint]) -> Result<ConstantDensity> {
        Ok(ConstantDensity(1.0 / self.pool_size as f64))
    }
}

/// Adapts a closure `(x, conditioning) -> density` into an evaluator.
///
/// Conditioning is deferred to each density query, so the closure runs once
/// per memoized `(point, bag)` pair.
#[derive(Clone)]
pub struct FnDensity<F>(pub F);

pub struct DeferredDensity<F> {
    f: F,
    conditioning: Vec<LabeledPoint>,
}

impl<F> QueryDensity for DeferredDensity<F>
where
    F: Fn(&[f64], &[LabeledPoint]) -> f64,
{
    fn density(&self, x: &[f64]) -> f64 {
        (self.f)(x, &self.conditioning)
    }
}

impl<F> DensityEvaluator for FnDensity<F>
where
    F: Fn(&[f64], &[LabeledPoint]) -> f64 + Clone,
{
    type Conditioned = DeferredDensity<F>;

    fn condition(&self, conditioning: &[&LabeledPoint]) -> Result<Self::Conditioned> {
        Ok(DeferredDensity {
            f: self.0.clone(),
            conditioning: conditioning.iter().map(|p| (*p).clone()).collect(),
        })
    }
}
