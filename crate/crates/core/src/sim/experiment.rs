//! The design and active-learning feedback loops.

use std::sync::Arc;
use std::time::Instant;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{CpKind, ExperimentConfig, MethodKind, Mode};
use super::pools::{biased_iid_init, build_pool, label_grid};
use crate::agents::{
    bounded_query, sample_query, softmax_query, CalibrationHistoryEvaluator, Pool,
    QueryDistribution, RefitEvaluator,
};
use crate::conformal::{
    full_cp_membership, full_cp_set_ridge, mfcs_split_interval,
    standard_split_interval, AciState, SplitCalibrationState,
};
use crate::data::{Bag, Extended, LabeledPoint, PredictionInterval};
use crate::error::{Error, Result};
use crate::predictors::{
    GaussianProcessModel, GpKernel, PredictorKind, Regressor, RidgeModel, SufficientStats,
};
use crate::weights::{WeightOptions, WeightVector};

/// Independent random streams derived from one experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    Query = 2,
    Noise = 3,
    CoinFlip = 4,
    Holdout = 5,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

/// One interval produced by one method at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub seed: u64,
    pub t: usize,
    pub method: String,
    pub covered: bool,
    pub width: Extended,
    /// Predicted fitness of the query (design) or holdout MSE (active
    /// learning).
    pub metric: f64,
    pub bound_relative: Option<f64>,
    /// The bounded proposal was infeasible and the unbounded one was used.
    pub bound_fallback: bool,
    pub wall_ms: Option<f64>,
    pub interval: Option<PredictionInterval>,
    pub label: f64,
    pub prediction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSpec {
    Standard,
    OneStep,
    Mfcs(usize),
    Aci,
}

impl MethodSpec {
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Standard => "standard".into(),
            MethodSpec::OneStep => "one-step".into(),
            MethodSpec::Mfcs(d) => format!("mfcs-d{d}"),
            MethodSpec::Aci => "aci".into(),
        }
    }
}

/// Config plus the pieces every seed shares.
#[derive(Debug, Clone)]
pub struct ExperimentContext {
    pub config: ExperimentConfig,
    pub pool: Arc<Pool>,
    pub grid: Vec<f64>,
    pub methods: Vec<MethodSpec>,
}

impl ExperimentContext {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let pool = Arc::new(build_pool(&config)?);
        let grid = label_grid(&pool, config.conformal.grid_points);
        let mut methods = Vec::new();
        for m in &config.experiment.methods {
            match m {
                MethodKind::Standard => methods.push(MethodSpec::Standard),
                MethodKind::OneStep => methods.push(MethodSpec::OneStep),
                MethodKind::Mfcs => methods.extend(config.experiment.d.iter().map(|&d| MethodSpec::Mfcs(d))),
                MethodKind::Aci => methods.push(MethodSpec::Aci),
            }
        }
        Ok(Self {
            config,
            pool,
            grid,
            methods,
        })
    }

    fn weight_options(&self) -> WeightOptions {
        WeightOptions {
            max_evaluations: self.config.conformal.max_evaluations as u128,
            ..WeightOptions::default()
        }
    }

    fn kernel(&self) -> GpKernel {
        self.config.gp_kernel()
    }
}

enum Fitted {
    Ridge(RidgeModel),
    Gp(GaussianProcessModel),
}

impl Regressor for Fitted {
    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Fitted::Ridge(m) => m.predict(x),
            Fitted::Gp(m) => m.predict(x),
        }
    }
}

impl Fitted {
    fn fit(ctx: &ExperimentContext, points: &[LabeledPoint]) -> Result<Self> {
        let stats = SufficientStats::from_points(ctx.pool.dim(), points)?;
        Ok(match ctx.config.experiment.predictor {
            PredictorKind::Ridge => Fitted::Ridge(RidgeModel::from_stats(
                &stats,
                ctx.config.predictor.ridge_regularization,
            )?),
            PredictorKind::Gp => Fitted::Gp(GaussianProcessModel::from_stats(&stats, ctx.kernel())?),
        })
    }

    fn utility(&self, mode: Mode, x: &[f64]) -> Result<f64> {
        match (mode, self) {
            (Mode::Design, m) => Ok(m.predict(x)),
            (Mode::ActiveLearning, Fitted::Gp(m)) => Ok(m.posterior_variance(x)),
            (Mode::ActiveLearning, Fitted::Ridge(_)) => Err(Error::config(
                "experiment.predictor",
                "active learning needs GP posterior variances",
            )),
        }
    }
}

/// Builds the proposal; a bounded proposal that is infeasible falls back to
/// the plain softmax and reports the fallback.
fn proposal(
    utilities: &[f64],
    cal_utilities: &[f64],
    lambda: f64,
    bounded: Option<f64>,
) -> Result<(QueryDistribution, bool)> {
    match bounded {
        None => Ok((softmax_query(utilities, lambda)?, false)),
        Some(alpha) => match bounded_query(utilities, cal_utilities, lambda, alpha) {
            Ok(q) => Ok((q, false)),
            Err(Error::BoundInfeasible { .. }) => Ok((softmax_query(utilities, lambda)?, true)),
            Err(e) => Err(e),
        },
    }
}

fn timed<T>(enabled: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, Option<f64>)> {
    if enabled {
        let start = Instant::now();
        let v = f()?;
        Ok((v, Some(start.elapsed().as_secs_f64() * 1e3)))
    } else {
        Ok((f()?, None))
    }
}

/// Runs one seed of the configured experiment.
pub fn run_experiment(ctx: &ExperimentContext, seed: u64) -> Result<Vec<StepRecord>> {
    match ctx.config.experiment.cp {
        CpKind::Split => run_split(ctx, seed),
        CpKind::Full => run_full(ctx, seed),
    }
}

pub fn run_design_experiment(ctx: &ExperimentContext, seed: u64) -> Result<Vec<StepRecord>> {
    if ctx.config.experiment.mode != Mode::Design {
        return Err(Error::config("experiment.mode", "expected design"));
    }
    run_experiment(ctx, seed)
}

pub fn run_active_learning_experiment(
    ctx: &ExperimentContext,
    seed: u64,
) -> Result<Vec<StepRecord>> {
    if ctx.config.experiment.mode != Mode::ActiveLearning {
        return Err(Error::config("experiment.mode", "expected active-learning"));
    }
    run_experiment(ctx, seed)
}

struct Setup {
    query_pool: Arc<Pool>,
    holdout: Vec<(Vec<f64>, f64)>,
    initial: Vec<LabeledPoint>,
}

fn setup(ctx: &ExperimentContext, seed: u64, noise: &mut ChaCha8Rng) -> Result<Setup> {
    let e = &ctx.config.experiment;
    let n_init = e.n_train + e.n_cal;
    let mut init = stream(seed, Stream::Init);
    let (query_pool, holdout) = match e.mode {
        Mode::Design => (ctx.pool.clone(), Vec::new()),
        Mode::ActiveLearning => {
            let mut rng = stream(seed, Stream::Holdout);
            let n = ctx.pool.len();
            let mut held = index::sample(&mut rng, n, e.holdout_size).into_vec();
            held.sort_unstable();
            let mut is_held = vec![false; n];
            held.iter().for_each(|&i| is_held[i] = true);
            let rest: Vec<usize> = (0..n).filter(|&i| !is_held[i]).collect();
            let holdout = held
                .iter()
                .map(|&i| (ctx.pool.candidate(i).to_vec(), ctx.pool.label(i)))
                .collect();
            (Arc::new(ctx.pool.subset(&rest)?), holdout)
        }
    };
    let idx: Vec<usize> = match e.mode {
        Mode::Design => (0..n_init)
            .map(|_| init.random_range(0..query_pool.len()))
            .collect(),
        Mode::ActiveLearning => {
            let mut chosen =
                biased_iid_init(query_pool.candidates(), n_init, e.gamma_init_bias, &mut init)?;
            chosen.shuffle(&mut init);
            chosen
        }
    };
    let initial = idx
        .iter()
        .map(|&i| LabeledPoint::new(query_pool.candidate(i).to_vec(), query_pool.observe(i, noise)))
        .collect();
    Ok(Setup {
        query_pool,
        holdout,
        initial,
    })
}

fn holdout_mse(model: &Fitted, holdout: &[(Vec<f64>, f64)]) -> f64 {
    let n = holdout.len() as f64;
    holdout
        .iter()
        .map(|(x, y)| (model.predict(x) - y).powi(2))
        .sum::<f64>()
        / n
}

fn run_split(ctx: &ExperimentContext, seed: u64) -> Result<Vec<StepRecord>> {
    let e = &ctx.config.experiment;
    let mut noise = stream(seed, Stream::Noise);
    let mut query = stream(seed, Stream::Query);
    let mut coin = stream(seed, Stream::CoinFlip);
    let Setup {
        query_pool,
        holdout,
        initial,
    } = setup(ctx, seed, &mut noise)?;
    let mut train: Vec<LabeledPoint> = initial[..e.n_train].to_vec();
    let mut cal: Vec<LabeledPoint> = initial[e.n_train..].to_vec();
    let n_cal_init = cal.len();
    let mut history = CalibrationHistoryEvaluator::new(query_pool.clone());
    let mut aci = AciState::new(e.alpha, e.aci_step)?;
    let opts = ctx.weight_options();
    let bounded = e.bounded.then_some(e.alpha);
    let mut records = Vec::with_capacity(e.steps * ctx.methods.len());

    for t in 1..=e.steps {
        let model = Fitted::fit(ctx, &train)?;
        let utilities = query_pool
            .candidates()
            .iter()
            .map(|c| model.utility(e.mode, c))
            .collect::<Result<Vec<f64>>>()?;
        let cal_utilities = cal
            .iter()
            .map(|p| model.utility(e.mode, &p.x))
            .collect::<Result<Vec<f64>>>()?;
        let (q, fallback) = proposal(&utilities, &cal_utilities, e.lambda, bounded)?;
        history.record(cal.len(), &q)?;
        let i = sample_query(&q, &mut query);
        let x = query_pool.candidate(i).to_vec();
        let y = query_pool.observe(i, &mut noise);

        let metric = match e.mode {
            Mode::Design => model.predict(&x),
            Mode::ActiveLearning => holdout_mse(&model, &holdout),
        };
        let state = SplitCalibrationState::new(model, Bag::from_points(cal.clone())?);
        let prediction = state.model().predict(&x);
        let dynamic = cal.len() - n_cal_init + 1;
        for method in &ctx.methods {
            let (interval, wall_ms) = timed(e.timing, || match *method {
                MethodSpec::Standard => standard_split_interval(&state, &x, e.alpha),
                MethodSpec::OneStep => mfcs_split_interval(&state, &x, &history, 1, e.alpha, &opts),
                MethodSpec::Mfcs(d) => {
                    mfcs_split_interval(&state, &x, &history, d.min(dynamic), e.alpha, &opts)
                }
                MethodSpec::Aci => standard_split_interval(&state, &x, aci.effective_alpha()),
            })?;
            let covered = interval.contains(y);
            if *method == MethodSpec::Aci {
                aci = aci.update(!covered);
            }
            records.push(StepRecord {
                seed,
                t,
                method: method.label(),
                covered,
                width: interval.width(),
                metric,
                bound_relative: q.bound_relative(),
                bound_fallback: fallback,
                wall_ms,
                interval: Some(interval),
                label: y,
                prediction,
            });
        }
        let point = LabeledPoint::new(x, y);
        if coin.random::<f64>() < e.cal_assignment_prob {
            cal.push(point);
        } else {
            train.push(point);
        }
    }
    Ok(records)
}

fn run_full(ctx: &ExperimentContext, seed: u64) -> Result<Vec<StepRecord>> {
    let e = &ctx.config.experiment;
    let mut noise = stream(seed, Stream::Noise);
    let mut query = stream(seed, Stream::Query);
    let Setup {
        query_pool,
        initial,
        ..
    } = setup(ctx, seed, &mut noise)?;
    let mut data: Vec<LabeledPoint> = initial[..e.n_train].to_vec();
    let reg = ctx.config.predictor.ridge_regularization;
    let evaluator = RefitEvaluator {
        pool: query_pool.clone(),
        lambda: e.lambda,
        regularization: reg,
        initial_size: e.n_train,
        bounded_alpha: e.bounded.then_some(e.alpha),
        labels: e.evaluator_labels,
    };
    let mut aci = AciState::new(e.alpha, e.aci_step)?;
    let opts = ctx.weight_options();
    let mut records = Vec::with_capacity(e.steps * ctx.methods.len());

    for t in 1..=e.steps {
        let refs: Vec<&LabeledPoint> = data.iter().collect();
        let (q, fallback) = evaluator.query_distribution(&refs)?;
        let model = Fitted::fit(ctx, &data)?;
        let i = sample_query(&q, &mut query);
        let x = query_pool.candidate(i).to_vec();
        let y = query_pool.observe(i, &mut noise);
        let prediction = model.predict(&x);
        let bag = Bag::from_points(data.clone())?;
        let uniform = |p: &[LabeledPoint]| Ok(WeightVector::uniform(p.len()));
        for method in &ctx.methods {
            let (set, wall_ms) = timed(e.timing, || match *method {
                MethodSpec::Standard => full_cp_membership(&bag, &x, e.alpha, &ctx.grid, reg, uniform),
                MethodSpec::OneStep => {
                    full_cp_set_ridge(&bag, &x, &evaluator, 1, e.alpha, &ctx.grid, reg, &opts)
                }
                MethodSpec::Mfcs(d) => {
                    full_cp_set_ridge(&bag, &x, &evaluator, d.min(t), e.alpha, &ctx.grid, reg, &opts)
                }
                MethodSpec::Aci => {
                    full_cp_membership(&bag, &x, aci.effective_alpha(), &ctx.grid, reg, uniform)
                }
            })?;
            let covered = set.covers(y);
            if *method == MethodSpec::Aci {
                aci = aci.update(!covered);
            }
            records.push(StepRecord {
                seed,
                t,
                method: method.label(),
                covered,
                width: set.width(),
                metric: prediction,
                bound_relative: q.bound_relative(),
                bound_fallback: fallback,
                wall_ms,
                interval: set.hull(),
                label: y,
                prediction,
            });
        }
        data.push(LabeledPoint::new(x, y));
    }
    Ok(records)
}
