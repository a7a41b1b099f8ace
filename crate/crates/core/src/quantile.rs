//! Weighted empirical score distributions with a point mass at infinity, and
//! the conservative quantile every conformal set is built from.

use crate::data::{Extended, PredictionInterval};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Tolerance on the total mass of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Slack allowed when comparing a cumulative weight against the target level.
///
/// Uniform weights `1/(n+1)` summed `k` times land a few ulps either side of
/// `k/(n+1)`; without slack the quantile would jump to the next order
/// statistic whenever `(n+1)(1-alpha)` is an integer.
pub const CUMULATIVE_SLACK: f64 = 1e-12;

/// Finite scores with probability weights plus a point mass at `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedScoreDistribution {
    entries: Vec<(f64, f64)>,
    infinity_mass: f64,
}

impl WeightedScoreDistribution {
    pub fn new(entries: Vec<(f64, f64)>, infinity_mass: f64) -> Result<Self> {
        let mut total = CompensatedSum::new();
        for &(score, weight) in &entries {
            if !score.is_finite() {
                return Err(Error::param(format!("score {score} is not finite")));
            }
            if !(weight >= 0.0) {
                return Err(Error::param(format!("weight {weight} is negative")));
            }
            total.add(weight);
        }
        if !(0.0..=1.0 + MASS_TOLERANCE).contains(&infinity_mass) {
            return Err(Error::param(format!(
                "infinity mass {infinity_mass} outside [0, 1]"
            )));
        }
        total.add(infinity_mass);
        if (total.total() - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::param(format!(
                "weights sum to {} instead of 1",
                total.total()
            )));
        }
        Ok(Self {
            entries,
            infinity_mass,
        })
    }

    /// Pairs calibration `scores` with `weights[..n]` and puts the final
    /// weight (the test point's) on `+inf`.
    pub fn from_calibration(scores: &[f64], weights: &[f64]) -> Result<Self> {
        if weights.len() != scores.len() + 1 {
            return Err(Error::shape(
                format!("{} weights", scores.len() + 1),
                weights.len(),
            ));
        }
        let entries = scores.iter().copied().zip(weights.iter().copied()).collect();
        Self::new(entries, weights[scores.len()])
    }

    /// Uniform weights `1/(n+1)` on each score and on `+inf`.
    pub fn uniform(scores: &[f64]) -> Result<Self> {
        let w = 1.0 / (scores.len() + 1) as f64;
        let entries = scores.iter().map(|&s| (s, w)).collect();
        let dist = Self {
            entries,
            infinity_mass: w,
        };
        for &(s, _) in &dist.entries {
            if !s.is_finite() {
                return Err(Error::param(format!("score {s} is not finite")));
            }
        }
        Ok(dist)
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn infinity_mass(&self) -> f64 {
        self.infinity_mass
    }

    /// Smallest score whose cumulative weight reaches `beta`; `+inf` when the
    /// finite mass never does.
    ///
    /// Tied scores are merged before the scan, so the result does not depend
    /// on entry order.
    pub fn quantile(&self, beta: f64) -> Result<Extended> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::param(format!("beta {beta} outside (0, 1)")));
        }
        let mut sorted = self.entries.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let target = beta - CUMULATIVE_SLACK;
        let mut cumulative = CompensatedSum::new();
        let mut i = 0;
        while i < sorted.len() {
            let score = sorted[i].0;
            while i < sorted.len() && sorted[i].0 == score {
                cumulative.add(sorted[i].1);
                i += 1;
            }
            if cumulative.total() >= target {
                return Ok(Extended::Finite(score));
            }
        }
        Ok(Extended::PosInf)
    }
}

/// Free-function form of [`WeightedScoreDistribution::quantile`].
pub fn weighted_quantile(dist: &WeightedScoreDistribution, beta: f64) -> Result<Extended> {
    dist.quantile(beta)
}

/// `[mu_hat - q, mu_hat + q]` for the absolute-residual score.
pub fn interval_from_residual_quantile(mu_hat: f64, q: Extended) -> Result<PredictionInterval> {
    match q {
        Extended::Finite(q) if q >= 0.0 => PredictionInterval::new(
            Extended::Finite(mu_hat - q),
            Extended::Finite(mu_hat + q),
        ),
        Extended::PosInf => Ok(PredictionInterval::unbounded()),
        other => Err(Error::param(format!("residual quantile {other} is negative"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_thirds_median() {
        let d = WeightedScoreDistribution::new(
            vec![(1.0, 1.0 / 3.0), (2.0, 1.0 / 3.0), (3.0, 1.0 / 3.0)],
            0.0,
        )
        .unwrap();
        assert_eq!(d.quantile(0.5).unwrap(), Extended::Finite(2.0));
    }

    #[test]
    fn cumulative_crosses_at_second_score() {
        let d = WeightedScoreDistribution::new(vec![(1.0, 0.5), (2.0, 0.25), (3.0, 0.25)], 0.0)
            .unwrap();
        assert_eq!(d.quantile(0.6).unwrap(), Extended::Finite(2.0));
    }

    #[test]
    fn infinity_mass_forces_infinite_quantile() {
        let d = WeightedScoreDistribution::new(vec![(1.0, 0.85)], 0.15).unwrap();
        assert_eq!(d.quantile(0.9).unwrap(), Extended::PosInf);
    }

    #[test]
    fn beta_out_of_range_is_rejected() {
        let d = WeightedScoreDistribution::new(vec![(1.0, 1.0)], 0.0).unwrap();
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
        assert!(d.quantile(f64::NAN).is_err());
    }

    #[test]
    fn unnormalized_weights_are_rejected() {
        assert!(WeightedScoreDistribution::new(vec![(1.0, 0.5)], 0.1).is_err());
        assert!(WeightedScoreDistribution::new(vec![(1.0, -0.1), (2.0, 1.1)], 0.0).is_err());
        assert!(WeightedScoreDistribution::new(vec![(f64::INFINITY, 1.0)], 0.0).is_err());
    }

    #[test]
    fn ties_are_merged() {
        let d = WeightedScoreDistribution::new(vec![(2.0, 0.3), (1.0, 0.2), (2.0, 0.3)], 0.2)
            .unwrap();
        assert_eq!(d.quantile(0.75).unwrap(), Extended::Finite(2.0));
        assert_eq!(d.quantile(0.85).unwrap(), Extended::PosInf);
    }

    #[test]
    fn residual_interval_examples() {
        let i = interval_from_residual_quantile(0.0, Extended::Finite(1.0)).unwrap();
        assert_eq!((i.lower(), i.upper()), (Extended::Finite(-1.0), Extended::Finite(1.0)));
        let i = interval_from_residual_quantile(2.5, Extended::Finite(0.0)).unwrap();
        assert_eq!((i.lower(), i.upper()), (Extended::Finite(2.5), Extended::Finite(2.5)));
        let i = interval_from_residual_quantile(1.0, Extended::PosInf).unwrap();
        assert!(!i.is_informative());
        assert_eq!((i.lower(), i.upper()), (Extended::NegInf, Extended::PosInf));
        assert!(interval_from_residual_quantile(0.0, Extended::Finite(-0.5)).is_err());
    }

    /// Rank-based split quantile: the `ceil((1-alpha)(n+1))`-th smallest score,
    /// infinite when that rank exceeds `n`. `alpha = num/den` keeps the rank
    /// computation in integers.
    fn rank_quantile(scores: &[f64], alpha_num: u64, alpha_den: u64) -> Extended {
        let n = scores.len() as u64;
        let k = ((alpha_den - alpha_num) * (n + 1)).div_ceil(alpha_den);
        if k > n {
            return Extended::PosInf;
        }
        let mut s = scores.to_vec();
        s.sort_by(f64::total_cmp);
        Extended::Finite(s[(k - 1) as usize])
    }

    proptest! {
        #[test]
        fn uniform_weights_match_rank_quantile(
            scores in prop::collection::vec(0.0f64..10.0, 1..60),
            alpha_num in 1u64..20,
        ) {
            let den = 20;
            let alpha = alpha_num as f64 / den as f64;
            let d = WeightedScoreDistribution::uniform(&scores).unwrap();
            prop_assert_eq!(d.quantile(1.0 - alpha).unwrap(), rank_quantile(&scores, alpha_num, den));
        }

        #[test]
        fn quantile_monotone_in_beta(
            raw in prop::collection::vec((0.0f64..5.0, 0.01f64..1.0), 1..20),
            inf_raw in 0.0f64..1.0,
            b1 in 0.01f64..0.99,
            b2 in 0.01f64..0.99,
        ) {
            let total: f64 = raw.iter().map(|e| e.1).sum::<f64>() + inf_raw;
            let entries: Vec<_> = raw.iter().map(|&(s, w)| (s, w / total)).collect();
            let inf_mass = 1.0 - entries.iter().map(|e| e.1).sum::<f64>();
            let d = WeightedScoreDistribution::new(entries, inf_mass.max(0.0)).unwrap();
            let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
            prop_assert!(d.quantile(lo).unwrap() <= d.quantile(hi).unwrap());
        }

        #[test]
        fn quantile_ignores_entry_order(
            raw in prop::collection::vec((0.0f64..5.0, 0.01f64..1.0), 1..20),
            beta in 0.01f64..0.99,
            seed in any::<u64>(),
        ) {
            let total: f64 = raw.iter().map(|e| e.1).sum();
            let entries: Vec<_> = raw.iter().map(|&(s, w)| (s, w / total)).collect();
            let mut shuffled = entries.clone();
            // Deterministic Fisher-Yates driven by the proptest seed.
            let mut state = seed | 1;
            for i in (1..shuffled.len()).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                shuffled.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let a = WeightedScoreDistribution::new(entries, 0.0).unwrap();
            let b = WeightedScoreDistribution::new(shuffled, 0.0).unwrap();
            prop_assert_eq!(a.quantile(beta).unwrap(), b.quantile(beta).unwrap());
        }
    }
}
