//! Exact and d-step weights under multistep feedback covariate shift.

use super::cache::{DensityCache, ExclusionKey};
use super::evaluator::DensityEvaluator;
use super::vector::WeightVector;
use super::{WeightOptions, WeightStats};
use crate::data::LabeledPoint;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Density of the IID initialization, used to reinstate the `j <= n` factors
/// when the initial sampling is not uniform.
pub type InitialDensity<'a> = &'a dyn Fn(&[f64]) -> f64;

/// Number of density queries the depth-`d` recursion issues on `m` points:
/// `m (m-1) ... (m-d+1)`.
pub fn dstep_evaluation_count(m: usize, d: usize) -> u128 {
    (0..d).map(|k| m.saturating_sub(k) as u128).product()
}

fn guard(work: u128, opts: &WeightOptions, hint: &str) -> Result<()> {
    if work > opts.max_evaluations {
        return Err(Error::Complexity {
            work,
            cap: opts.max_evaluations,
            hint: hint.to_string(),
        });
    }
    Ok(())
}

/// Exact weights: sum over every ordering of the `t` dynamic positions.
///
/// `points` holds the `n` initial points and `t` queried points in any order;
/// the result gives, for each index, the probability that it occupies the
/// final (test) position. Initialization factors are dropped unless
/// `initial` is supplied.
pub fn mfcs_exact_weights<E: DensityEvaluator>(
    points: &[LabeledPoint],
    evaluator: &E,
    n: usize,
    t: usize,
    initial: Option<InitialDensity<'_>>,
    opts: &WeightOptions,
) -> Result<WeightVector> {
    mfcs_exact_weights_with_stats(points, evaluator, n, t, initial, opts).map(|(w, _)| w)
}

pub fn mfcs_exact_weights_with_stats<E: DensityEvaluator>(
    points: &[LabeledPoint],
    evaluator: &E,
    n: usize,
    t: usize,
    initial: Option<InitialDensity<'_>>,
    opts: &WeightOptions,
) -> Result<(WeightVector, WeightStats)> {
    let m = points.len();
    if t == 0 {
        return Err(Error::param("t must be at least 1"));
    }
    if m != n + t {
        return Err(Error::shape(format!("n + t = {} points", n + t), m));
    }
    let work: u128 = (1..=t).map(|j| (n + j) as u128).product();
    guard(
        work,
        opts,
        "use mfcs_dstep_weights with a smaller estimation depth",
    )?;

    let initial_factors: Option<Vec<f64>> = initial.map(|p0| {
        points.iter().map(|p| p0(&p.x)).collect()
    });

    let mut cache = DensityCache::new(points, evaluator);
    let mut numerators = vec![CompensatedSum::new(); m];
    // sequence[k] is the point placed at dynamic position n + 1 + k.
    let mut sequence: Vec<usize> = Vec::with_capacity(t);
    let mut used = vec![false; m];
    let mut paths = 0u64;
    enumerate_sequences(
        &mut sequence,
        &mut used,
        t,
        &mut |seq| -> Result<()> {
            paths += 1;
            let mut product = 1.0;
            let mut excluded = ExclusionKey::empty(m);
            for &i in seq.iter().rev() {
                excluded.insert(i);
                product *= cache.density(i, &excluded)?;
                if product == 0.0 {
                    break;
                }
            }
            if let Some(f0) = &initial_factors {
                for (k, f) in f0.iter().enumerate() {
                    if !seq.contains(&k) {
                        product *= f;
                    }
                }
            }
            numerators[*seq.last().expect("t >= 1")].add(product);
            Ok(())
        },
    )?;

    let stats = WeightStats {
        evaluator_calls: paths,
        distinct_bags: cache.distinct_bags(),
    };
    let w = WeightVector::from_unnormalized(numerators.iter().map(|s| s.total()).collect())?;
    Ok((w, stats))
}

fn enumerate_sequences<F>(
    seq: &mut Vec<usize>,
    used: &mut [bool],
    len: usize,
    visit: &mut F,
) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    if seq.len() == len {
        return visit(seq);
    }
    for i in 0..used.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        seq.push(i);
        enumerate_sequences(seq, used, len, visit)?;
        seq.pop();
        used[i] = false;
    }
    Ok(())
}

/// Depth-`d` estimate of the MFCS weights.
///
/// For each candidate test index `i1` the numerator is
/// `p(x_i1 | z_-{i1}) * sum_{i2 != i1} p(x_i2 | z_-{i1,i2}) * ...` nested `d`
/// levels deep; the weights are the numerators normalized by their sum.
/// With `d = t` this coincides with [`mfcs_exact_weights`].
pub fn mfcs_dstep_weights<E: DensityEvaluator>(
    points: &[LabeledPoint],
    evaluator: &E,
    d: usize,
    opts: &WeightOptions,
) -> Result<WeightVector> {
    mfcs_dstep_weights_with_stats(points, evaluator, d, opts).map(|(w, _)| w)
}

pub fn mfcs_dstep_weights_with_stats<E: DensityEvaluator>(
    points: &[LabeledPoint],
    evaluator: &E,
    d: usize,
    opts: &WeightOptions,
) -> Result<(WeightVector, WeightStats)> {
    let m = points.len();
    if d < 1 {
        return Err(Error::param("estimation depth must be at least 1"));
    }
    if d > m {
        return Err(Error::param(format!(
            "estimation depth {d} exceeds the {m} available points"
        )));
    }
    guard(
        dstep_evaluation_count(m, d),
        opts,
        "reduce the estimation depth",
    )?;

    let mut cache = DensityCache::new(points, evaluator);
    let mut excluded = ExclusionKey::empty(m);
    let mut numerators = Vec::with_capacity(m);
    let mut paths = 0u64;
    for i1 in 0..m {
        excluded.insert(i1);
        let head = cache.density(i1, &excluded)?;
        let tail = nested_sum(&mut cache, &mut excluded, m, d - 1, &mut paths)?;
        numerators.push(head * tail);
        excluded.remove(i1);
    }
    let stats = WeightStats {
        evaluator_calls: paths,
        distinct_bags: cache.distinct_bags(),
    };
    Ok((WeightVector::from_unnormalized(numerators)?, stats))
}

fn nested_sum<E: DensityEvaluator>(
    cache: &mut DensityCache<'_, E>,
    excluded: &mut ExclusionKey,
    m: usize,
    remaining: usize,
    paths: &mut u64,
) -> Result<f64> {
    if remaining == 0 {
        *paths += 1;
        return Ok(1.0);
    }
    let mut acc = CompensatedSum::new();
    for i in 0..m {
        if excluded.contains(i) {
            continue;
        }
        excluded.insert(i);
        let p = cache.density(i, excluded)?;
        let inner = nested_sum(cache, excluded, m, remaining - 1, paths)?;
        acc.add(p * inner);
        excluded.remove(i);
    }
    Ok(acc.total())
}
