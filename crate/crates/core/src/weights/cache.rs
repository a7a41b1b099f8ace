//! Memoized density queries keyed by (point index, excluded index set).

use std::collections::HashMap;

use smallvec::SmallVec;

use super::evaluator::{DensityEvaluator, QueryDensity};
use crate::data::LabeledPoint;
use crate::error::{Error, Result};

/// Order-independent fingerprint of an excluded index set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct ExclusionKey {
    words: SmallVec<[u64; 2]>,
}

impl ExclusionKey {
    pub(crate) fn empty(len: usize) -> Self {
        Self {
            words: SmallVec::from_elem(0, len.div_ceil(64).max(1)),
        }
    }

    #[inline]
    pub(crate) fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub(crate) fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub(crate) fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }
}

struct ConditionedBag<C> {
    density: C,
    values: Vec<f64>,
}

/// Evaluator wrapper that conditions each distinct bag once and remembers
/// every `p(x_i | z_{-K})` it has produced.
pub(crate) struct DensityCache<'a, E: DensityEvaluator> {
    points: &'a [LabeledPoint],
    evaluator: &'a E,
    bags: HashMap<ExclusionKey, ConditionedBag<E::Conditioned>>,
}

impl<'a, E: DensityEvaluator> DensityCache<'a, E> {
    pub(crate) fn new(points: &'a [LabeledPoint], evaluator: &'a E) -> Self {
        Self {
            points,
            evaluator,
            bags: HashMap::new(),
        }
    }

    /// `p(x_target | points not in excluded)`; `target` must be in `excluded`.
    pub(crate) fn density(&mut self, target: usize, excluded: &ExclusionKey) -> Result<f64> {
        debug_assert!(excluded.contains(target));
        if let Some(bag) = self.bags.get_mut(excluded) {
            let cached = bag.values[target];
            if !cached.is_nan() {
                return Ok(cached);
            }
            let v = checked(bag.density.density(&self.points[target].x), target)?;
            bag.values[target] = v;
            return Ok(v);
        }
        let conditioning: Vec<&LabeledPoint> = self
            .points
            .iter()
            .enumerate()
            .filter(|(i, _)| !excluded.contains(*i))
            .map(|(_, p)| p)
            .collect();
        let density = self.evaluator.condition(&conditioning)?;
        let v = checked(density.density(&self.points[target].x), target)?;
        let mut values = vec![f64::NAN; self.points.len()];
        values[target] = v;
        self.bags
            .insert(excluded.clone(), ConditionedBag { density, values });
        Ok(v)
    }

    pub(crate) fn distinct_bags(&self) -> usize {
        self.bags.len()
    }
}

fn checked(v: f64, target: usize) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!(
            "query density for point {target} is {v}"
        )))
    }
}
