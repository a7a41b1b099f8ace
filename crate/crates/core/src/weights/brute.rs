//! Factorial-time permutation oracle for arbitrary joint densities.

use super::evaluator::{DensityEvaluator, QueryDensity};
use super::mfcs::InitialDensity;
use super::vector::WeightVector;
use super::WeightOptions;
use crate::data::LabeledPoint;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Joint density of an ordered sequence of points. Need not be normalized.
pub trait JointDensity {
    fn density(&self, ordered: &[&LabeledPoint]) -> f64;
}

impl<F> JointDensity for F
where
    F: Fn(&[&LabeledPoint]) -> f64,
{
    fn density(&self, ordered: &[&LabeledPoint]) -> f64 {
        self(ordered)
    }
}

/// For each index `i`, the total density of orderings that put point `i`
/// last, divided by the total density over all `m!` orderings.
pub fn brute_force_weights<J: JointDensity + ?Sized>(
    points: &[LabeledPoint],
    joint: &J,
    opts: &WeightOptions,
) -> Result<WeightVector> {
    let m = points.len();
    if m == 0 {
        return Err(Error::param("no points"));
    }
    if m > opts.max_brute_force_points {
        let work: u128 = (1..=m as u128).product();
        let cap: u128 = (1..=opts.max_brute_force_points as u128).product();
        return Err(Error::Complexity {
            work,
            cap,
            hint: "permutation enumeration is factorial; use the MFCS weights".into(),
        });
    }
    let mut order: Vec<usize> = (0..m).collect();
    let mut last_mass = vec![CompensatedSum::new(); m];
    let mut total = CompensatedSum::new();
    let mut visit = |order: &[usize]| -> Result<()> {
        let seq: Vec<&LabeledPoint> = order.iter().map(|&i| &points[i]).collect();
        let f = joint.density(&seq);
        if !(f >= 0.0) || !f.is_finite() {
            return Err(Error::Numerical(format!("joint density {f} on a permutation")));
        }
        last_mass[order[m - 1]].add(f);
        total.add(f);
        Ok(())
    };
    heap_permutations(&mut order, &mut visit)?;
    if total.total() <= 0.0 {
        return Err(Error::DegenerateDensity);
    }
    WeightVector::from_unnormalized(last_mass.iter().map(CompensatedSum::total).collect())
}

/// Visits every permutation of `items` (Heap's algorithm, iterative form).
fn heap_permutations<F>(items: &mut [usize], visit: &mut F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items)?;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items)?;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(())
}

/// `p(y | x)`.
pub type LabelDensity<'a> = &'a dyn Fn(f64, &[f64]) -> f64;

/// Joint density with the multistep feedback covariate shift factorization:
/// the first `initial_count` points are drawn IID from `initial`, every later
/// point from `evaluator` conditioned on its predecessors, and every label
/// from `label`.
pub struct MfcsJointDensity<'a, E> {
    pub evaluator: &'a E,
    pub initial_count: usize,
    pub initial: Option<InitialDensity<'a>>,
    pub label: Option<LabelDensity<'a>>,
}

impl<E: DensityEvaluator> JointDensity for MfcsJointDensity<'_, E> {
    fn density(&self, ordered: &[&LabeledPoint]) -> f64 {
        let mut f = 1.0;
        for (j, z) in ordered.iter().enumerate() {
            if j < self.initial_count {
                if let Some(p0) = self.initial {
                    f *= p0(&z.x);
                }
            } else {
                let conditioned = self
                    .evaluator
                    .condition(&ordered[..j])
                    .expect("evaluator failed inside the permutation oracle");
                f *= conditioned.density(&z.x);
            }
            if let Some(label) = self.label {
                f *= label(z.y, &z.x);
            }
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(m: usize) -> Vec<LabeledPoint> {
        (0..m).map(|i| LabeledPoint::new(vec![i as f64], i as f64)).collect()
    }

    #[test]
    fn constant_density_is_exchangeable() {
        let p = pts(3);
        let w = brute_force_weights(&p, &|_: &[&LabeledPoint]| 1.0, &WeightOptions::default())
            .unwrap();
        for i in 0..3 {
            assert!((w[i] - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_point_ratio() {
        let p = pts(2);
        // f(z1, z2) = 2, f(z2, z1) = 1.
        let f = |s: &[&LabeledPoint]| if s[0].y == 0.0 { 2.0 } else { 1.0 };
        let w = brute_force_weights(&p, &f, &WeightOptions::default()).unwrap();
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((w[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn heap_visits_every_permutation_once() {
        let mut items: Vec<usize> = (0..5).collect();
        let mut seen = std::collections::HashSet::new();
        heap_permutations(&mut items, &mut |o| {
            assert!(seen.insert(o.to_vec()));
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 120);
    }

    #[test]
    fn scaling_density_leaves_weights_unchanged() {
        let p = pts(4);
        let f = |s: &[&LabeledPoint]| s.iter().enumerate().map(|(j, z)| 1.0 + j as f64 * z.y).product::<f64>();
        let g = |s: &[&LabeledPoint]| 7.5e3 * f(s);
        let a = brute_force_weights(&p, &f, &WeightOptions::default()).unwrap();
        let b = brute_force_weights(&p, &g, &WeightOptions::default()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn errors() {
        let opts = WeightOptions::default();
        assert!(matches!(
            brute_force_weights(&pts(9), &|_: &[&LabeledPoint]| 1.0, &opts),
            Err(Error::Complexity { .. })
        ));
        assert!(matches!(
            brute_force_weights(&pts(3), &|_: &[&LabeledPoint]| 0.0, &opts),
            Err(Error::DegenerateDensity)
        ));
    }
}
