//! Synthetic candidate pools, biased initialization and label grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{ExperimentConfig, PoolKind};
use crate::agents::Pool;
use crate::error::{Error, Result};
use crate::numeric::dot;

/// Seeded polynomial `sum a_i x_i + sum_{i<j} b_ij x_i x_j`, standardized to
/// zero mean and unit population variance over `points`.
///
/// `b_ij = epistasis * a_i * a_j + 0.1 * e_ij` with independent standard
/// normal `e_ij`: positive `epistasis` makes effects compound, so the label
/// curves upward along the additive direction.
fn polynomial_labels(
    points: &[Vec<f64>],
    order: usize,
    epistasis: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let dim = points[0].len();
    let linear: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let mut pairwise = Vec::new();
    if order >= 2 {
        for i in 0..dim {
            for j in i + 1..dim {
                let e: f64 = rng.sample(StandardNormal);
                pairwise.push((i, j, epistasis * linear[i] * linear[j] + 0.1 * e));
            }
        }
    }
    let raw: Vec<f64> = points
        .iter()
        .map(|x| {
            dot(&linear, x) + pairwise.iter().map(|&(i, j, b)| b * x[i] * x[j]).sum::<f64>()
        })
        .collect();
    let n = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let var = raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
    raw.iter().map(|v| (v - mean) / sd).collect()
}

/// All `2^length` vectors in `{-1, +1}^length` with seeded labels.
pub fn make_combinatorial_pool(
    length: usize,
    interaction_order: usize,
    epistasis: f64,
    noise_scale: f64,
    seed: u64,
) -> Result<Pool> {
    if !(4..=14).contains(&length) {
        return Err(Error::param(format!("sequence length {length} outside [4, 14]")));
    }
    let points: Vec<Vec<f64>> = (0..1usize << length)
        .map(|code| {
            (0..length)
                .map(|k| if code >> k & 1 == 1 { 1.0 } else { -1.0 })
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = polynomial_labels(&points, interaction_order, epistasis, &mut rng);
    let n = points.len();
    Pool::new(points, labels, vec![noise_scale; n])
}

/// `size` rotated, anisotropic Gaussian vectors, min-max scaled to `[0, 1]`
/// per feature, with seeded labels.
pub fn make_continuous_pool(
    size: usize,
    dim: usize,
    interaction_order: usize,
    epistasis: f64,
    noise_scale: f64,
    seed: u64,
) -> Result<Pool> {
    if size < 2 || dim < 1 {
        return Err(Error::param("continuous pool needs size >= 2 and dim >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Random rotation by Gram-Schmidt on a Gaussian matrix.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for b in &basis {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            basis.push(v.iter().map(|vi| vi / norm).collect());
        }
    }
    let mut points: Vec<Vec<f64>> = (0..size)
        .map(|_| {
            let z: Vec<f64> = (0..dim)
                .map(|k| rng.sample::<f64, _>(StandardNormal) / (k + 1) as f64)
                .collect();
            (0..dim)
                .map(|r| (0..dim).map(|k| basis[k][r] * z[k]).sum())
                .collect()
        })
        .collect();
    for k in 0..dim {
        let lo = points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        for p in &mut points {
            p[k] = (p[k] - lo) / span;
        }
    }
    let labels = polynomial_labels(&points, interaction_order, epistasis, &mut rng);
    Pool::new(points, labels, vec![noise_scale; size])
}

/// Pool described by a config's `[pool]` section.
pub fn build_pool(config: &ExperimentConfig) -> Result<Pool> {
    let p = &config.pool;
    match p.kind {
        PoolKind::Hypercube => {
            make_combinatorial_pool(p.length, p.interaction_order, p.epistasis, p.noise_scale, p.seed)
        }
        PoolKind::Continuous => make_continuous_pool(
            p.size,
            p.length,
            p.interaction_order,
            p.epistasis,
            p.noise_scale,
            p.seed,
        ),
    }
}

/// Leading eigenvector of the sample covariance, by power iteration.
///
/// The sign is fixed so that the largest-magnitude entry is positive.
pub fn first_principal_component(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    const TOL: f64 = 1e-10;
    const MAX_ITER: usize = 10_000;
    if points.is_empty() {
        return Err(Error::param("no points"));
    }
    let dim = points[0].len();
    let n = points.len() as f64;
    let mut mean = vec![0.0; dim];
    for p in points {
        mean.iter_mut().zip(p).for_each(|(m, v)| *m += v / n);
    }
    let mut cov = vec![0.0; dim * dim];
    for p in points {
        for i in 0..dim {
            let di = p[i] - mean[i];
            for j in 0..dim {
                cov[i * dim + j] += di * (p[j] - mean[j]) / n;
            }
        }
    }
    let mut v: Vec<f64> = (0..dim).map(|k| 1.0 / (k + 1) as f64).collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    for _ in 0..MAX_ITER {
        let w: Vec<f64> = (0..dim)
            .map(|i| dot(&cov[i * dim..(i + 1) * dim], &v))
            .collect();
        let norm = dot(&w, &w).sqrt();
        if norm == 0.0 {
            return Ok(orient(v));
        }
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta < TOL {
            return Ok(orient(v));
        }
    }
    Err(Error::Numerical(format!(
        "power iteration did not converge in {MAX_ITER} iterations"
    )))
}

fn orient(mut v: Vec<f64>) -> Vec<f64> {
    let k = (0..v.len())
        .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()))
        .unwrap_or(0);
    if v[k] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Projections onto the first principal component, min-max scaled to
/// `[0, 1]`.
pub fn normalized_pc1_scores(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let pc = first_principal_component(points)?;
    let proj: Vec<f64> = points.iter().map(|p| dot(p, &pc)).collect();
    let lo = proj.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(proj
        .iter()
        .map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
        .collect())
}

/// Draws `n` distinct indices of `points` without replacement, with
/// probability proportional to `exp(gamma * s)` for the normalized first
/// principal component score `s`.
pub fn biased_iid_init<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    n: usize,
    gamma: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if n > points.len() {
        return Err(Error::param(format!(
            "cannot draw {n} points from {} without replacement",
            points.len()
        )));
    }
    let scores = normalized_pc1_scores(points)?;
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = scores.iter().map(|s| (gamma * (s - top)).exp()).collect();
    let mut chosen = Vec::with_capacity(n);
    for _ in 0..n {
        let total: f64 = weights.iter().sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                pick = Some(i);
                if u < acc {
                    break;
                }
            }
        }
        let i = pick.ok_or_else(|| Error::Numerical("all sampling weights vanished".into()))?;
        weights[i] = 0.0;
        chosen.push(i);
    }
    Ok(chosen)
}

/// `points` evenly spaced labels spanning the pool labels widened by two
/// standard deviations on each side.
pub fn label_grid(pool: &Pool, points: usize) -> Vec<f64> {
    let labels = pool.labels();
    let n = labels.len() as f64;
    let mean = labels.iter().sum::<f64>() / n;
    let sd = (labels.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let lo = labels.iter().copied().fold(f64::INFINITY, f64::min) - 2.0 * sd;
    let hi = labels.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0 * sd;
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_pool() {
        let p = make_combinatorial_pool(4, 2, 0.15, 0.1, 3).unwrap();
        assert_eq!(p.len(), 16);
        let q = make_combinatorial_pool(4, 2, 0.15, 0.1, 3).unwrap();
        assert_eq!(p.labels(), q.labels());
        let mean = p.labels().iter().sum::<f64>() / 16.0;
        let var = p.labels().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 16.0;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-9);
        assert!(make_combinatorial_pool(3, 2, 0.15, 0.1, 3).is_err());
        assert!(make_combinatorial_pool(15, 2, 0.15, 0.1, 3).is_err());
    }

    #[test]
    fn continuous_pool_is_scaled() {
        let p = make_continuous_pool(200, 3, 2, 0.15, 0.1, 5).unwrap();
        for k in 0..3 {
            let lo = p.candidates().iter().map(|c| c[k]).fold(f64::INFINITY, f64::min);
            let hi = p.candidates().iter().map(|c| c[k]).fold(f64::NEG_INFINITY, f64::max);
            assert!(lo.abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_gamma_is_uniform_and_large_gamma_picks_the_top() {
        let p = make_continuous_pool(50, 2, 1, 0.0, 0.0, 1).unwrap();
        let scores = normalized_pc1_scores(p.candidates()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let top = biased_iid_init(p.candidates(), 1, 1e3, &mut rng).unwrap();
        assert_eq!(scores[top[0]], 1.0);
        let mut counts = [0usize; 50];
        for _ in 0..20_000 {
            counts[biased_iid_init(p.candidates(), 1, 0.0, &mut rng).unwrap()[0]] += 1;
        }
        // 400 expected per index; 5 sd is about 100.
        assert!(counts.iter().all(|&c| (300..=500).contains(&c)));
    }

    #[test]
    fn grid_spans_labels() {
        let p = make_combinatorial_pool(5, 1, 0.0, 0.1, 2).unwrap();
        let g = label_grid(&p, 200);
        assert_eq!(g.len(), 200);
        let max = p.labels().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((g[199] - (max + 2.0)).abs() < 1e-9);
    }
}
