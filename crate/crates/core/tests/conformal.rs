use mfcs_core::conformal::{
    full_cp_membership, full_cp_set_ridge, mfcs_split_interval, standard_split_interval, AciState,
    SplitCalibrationState,
};
use mfcs_core::data::{Bag, LabeledPoint};
use mfcs_core::predictors::{Regressor, RidgeModel};
use mfcs_core::sim::random_instance;
use mfcs_core::weights::{
    brute_force_weights, mfcs_dstep_weights, mfcs_dstep_weights_with_stats, mfcs_exact_weights,
    FnDensity, MfcsJointDensity, UniformEvaluator, WeightOptions, WeightVector,
};
use mfcs_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn points(m: usize, seed: u64) -> Vec<LabeledPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            let x = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let y = x[0] - 0.5 * x[1] + rng.random_range(-0.3..0.3);
            LabeledPoint::new(x, y)
        })
        .collect()
}

/// Density that depends on the conditioning labels, so feedback matters.
fn feedback_density(x: &[f64], bag: &[LabeledPoint]) -> f64 {
    let pull: f64 = bag.iter().map(|p| p.y * p.x[0]).sum::<f64>() / (1.0 + bag.len() as f64);
    (1.5 * pull * x[0] + 0.3 * x[1]).exp()
}

#[test]
fn label_factors_cancel_in_the_permutation_oracle() {
    let opts = WeightOptions::default();
    let evaluator = FnDensity(feedback_density);
    let label = |y: f64, x: &[f64]| (-(y - x[0]).powi(2)).exp();
    for seed in 0..10 {
        let pts = points(6, seed);
        let (n, t) = (3, 3);
        let joint = MfcsJointDensity {
            evaluator: &evaluator,
            initial_count: n,
            initial: None,
            label: Some(&label),
        };
        let brute = brute_force_weights(&pts, &joint, &opts).unwrap();
        let exact = mfcs_exact_weights(&pts, &evaluator, n, t, None, &opts).unwrap();
        let dstep = mfcs_dstep_weights(&pts, &evaluator, t, &opts).unwrap();
        assert!(brute.max_abs_diff(&exact) < 1e-10, "seed {seed}");
        assert!(dstep.max_abs_diff(&exact) < 1e-10, "seed {seed}");
    }
}

#[test]
fn nonuniform_initial_density_matches_oracle() {
    let opts = WeightOptions::default();
    let evaluator = FnDensity(feedback_density);
    let initial = |x: &[f64]| (0.8 * x[1]).exp();
    let pts = points(6, 42);
    let joint = MfcsJointDensity {
        evaluator: &evaluator,
        initial_count: 4,
        initial: Some(&initial),
        label: None,
    };
    let brute = brute_force_weights(&pts, &joint, &opts).unwrap();
    let exact = mfcs_exact_weights(&pts, &evaluator, 4, 2, Some(&initial), &opts).unwrap();
    assert!(brute.max_abs_diff(&exact) < 1e-10);
    let dropped = mfcs_exact_weights(&pts, &evaluator, 4, 2, None, &opts).unwrap();
    assert!(brute.max_abs_diff(&dropped) > 1e-6);
}

#[test]
fn dstep_call_counts_are_falling_factorials() {
    let opts = WeightOptions::default();
    let pts = points(9, 1);
    let evaluator = FnDensity(feedback_density);
    for d in 1..=4 {
        let (_, stats) = mfcs_dstep_weights_with_stats(&pts, &evaluator, d, &opts).unwrap();
        let expected: u64 = (0..d as u64).map(|k| 9 - k).product();
        assert_eq!(stats.evaluator_calls, expected, "d {d}");
    }
}

#[test]
fn complexity_guards_refuse_oversized_work() {
    let opts = WeightOptions {
        max_brute_force_points: 8,
        max_evaluations: 100,
    };
    let pts = points(9, 2);
    let evaluator = FnDensity(feedback_density);
    let joint = MfcsJointDensity {
        evaluator: &evaluator,
        initial_count: 5,
        initial: None,
        label: None,
    };
    assert!(matches!(
        brute_force_weights(&pts, &joint, &opts),
        Err(Error::Complexity { .. })
    ));
    assert!(matches!(
        mfcs_dstep_weights(&pts, &evaluator, 3, &opts),
        Err(Error::Complexity { .. })
    ));
    assert!(mfcs_dstep_weights(&pts, &evaluator, 2, &opts).is_ok());
}

#[test]
fn uniform_evaluator_reduces_to_standard_split() {
    let pts = points(40, 3);
    let train = Bag::from_points(pts[..20].to_vec()).unwrap();
    let cal = Bag::from_points(pts[20..].to_vec()).unwrap();
    let state = SplitCalibrationState::new(RidgeModel::fit(&train, 0.01).unwrap(), cal);
    let evaluator = UniformEvaluator { pool_size: 50 };
    let opts = WeightOptions::default();
    for k in 0..10 {
        let x = [0.2 * k as f64 - 1.0, 0.1];
        let standard = standard_split_interval(&state, &x, 0.1).unwrap();
        for d in 1..=2 {
            let weighted = mfcs_split_interval(&state, &x, &evaluator, d, 0.1, &opts).unwrap();
            assert_eq!(weighted, standard);
        }
    }
}

/// Standard full CP by refitting at every grid label and ranking residuals.
fn standard_full_oracle(data: &Bag, x: &[f64], y: f64, alpha: f64, reg: f64) -> bool {
    let mut pts = data.points().to_vec();
    pts.push(LabeledPoint::new(x.to_vec(), y));
    let model = RidgeModel::fit(&Bag::from_points(pts.clone()).unwrap(), reg).unwrap();
    let residuals: Vec<f64> = pts.iter().map(|p| (p.y - model.predict(&p.x)).abs()).collect();
    let n = data.len();
    let mut cal = residuals[..n].to_vec();
    cal.sort_by(f64::total_cmp);
    let rank = ((1.0 - alpha) * (n + 1) as f64 - 1e-9).ceil() as usize;
    rank > n || residuals[n] <= cal[rank - 1] + 1e-9
}

#[test]
fn uniform_full_cp_matches_refit_oracle() {
    let reg = 0.1;
    let grid: Vec<f64> = (0..200).map(|k| -4.0 + 8.0 * k as f64 / 199.0).collect();
    for seed in 0..10 {
        let data = Bag::from_points(points(19, 100 + seed)).unwrap();
        let x = [0.4, -0.3];
        let set = full_cp_membership(&data, &x, 0.1, &grid, reg, |pts| {
            Ok(WeightVector::uniform(pts.len()))
        })
        .unwrap();
        for (y, inside) in set.grid().iter().zip(set.mask()) {
            assert_eq!(*inside, standard_full_oracle(&data, &x, *y, 0.1, reg), "seed {seed} y {y}");
        }
        assert!(set.is_contiguous());
        let hull = set.hull().unwrap();
        let labels = set.labels();
        assert_eq!(hull.lower().to_f64(), labels[0]);
        assert_eq!(hull.upper().to_f64(), *labels.last().unwrap());
    }
}

#[test]
fn full_cp_depth_t_matches_exact_weights() {
    let opts = WeightOptions::default();
    let grid: Vec<f64> = (0..60).map(|k| -5.0 + 10.0 * k as f64 / 59.0).collect();
    for seed in 0..5 {
        let inst = random_instance(8, 2, 300 + seed).unwrap();
        let (data, test) = inst.points.split_at(inst.points.len() - 1);
        let data = Bag::from_points(data.to_vec()).unwrap();
        let x = &test[0].x;
        let reg = inst.evaluator.regularization;
        let dstep = full_cp_set_ridge(&data, x, &inst.evaluator, 2, 0.2, &grid, reg, &opts).unwrap();
        let exact = full_cp_membership(&data, x, 0.2, &grid, reg, |pts| {
            mfcs_exact_weights(pts, &inst.evaluator, 8, 2, None, &opts)
        })
        .unwrap();
        assert_eq!(dstep.mask(), exact.mask(), "seed {seed}");
    }
}

#[test]
fn deeper_weights_change_some_full_cp_sets() {
    let opts = WeightOptions::default();
    let grid: Vec<f64> = (0..100).map(|k| -5.0 + 10.0 * k as f64 / 99.0).collect();
    let mut differing = 0;
    for seed in 0..10 {
        let inst = random_instance(4, 3, 500 + seed).unwrap();
        let (data, test) = inst.points.split_at(inst.points.len() - 1);
        let data = Bag::from_points(data.to_vec()).unwrap();
        let x = &test[0].x;
        let reg = inst.evaluator.regularization;
        let one = full_cp_set_ridge(&data, x, &inst.evaluator, 1, 0.2, &grid, reg, &opts).unwrap();
        let three = full_cp_set_ridge(&data, x, &inst.evaluator, 3, 0.2, &grid, reg, &opts).unwrap();
        if one.mask() != three.mask() {
            differing += 1;
        }
    }
    assert!(differing >= 1);
}

#[test]
fn full_cp_rejects_bad_grids() {
    let data = Bag::from_points(points(5, 9)).unwrap();
    let uniform = |pts: &[LabeledPoint]| Ok(WeightVector::uniform(pts.len()));
    assert!(full_cp_membership(&data, &[0.0, 0.0], 0.1, &[], 0.1, uniform).is_err());
    assert!(full_cp_membership(&data, &[0.0, 0.0], 0.1, &[1.0, 0.0], 0.1, uniform).is_err());
}

#[test]
fn aci_clips_to_the_unit_interval() {
    let mut state = AciState::new(0.1, 0.5).unwrap();
    for _ in 0..20 {
        state = state.update(false);
    }
    assert_eq!(state.effective_alpha(), 0.999);
    for _ in 0..10 {
        state = state.update(true);
    }
    assert_eq!(state.effective_alpha(), 0.001);
    assert!(AciState::new(1.5, 0.1).is_err());
}
