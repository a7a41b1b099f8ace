//! Synthetic pools, the feedback-loop experiments and their aggregation.

mod aggregate;
mod config;
mod experiment;
mod pools;
mod runner;
mod verify;

pub use aggregate::{aggregate, interpolated_quantile, mean_se, SummaryRow};
pub use config::{
    ConformalSection, CpKind, ExperimentConfig, ExperimentSection, MethodKind, Mode, PoolKind,
    PoolSection, PredictorSection, SeedRange,
};
pub use experiment::{
    run_active_learning_experiment, run_design_experiment, run_experiment, stream,
    ExperimentContext, MethodSpec, StepRecord, Stream,
};
pub use pools::{
    biased_iid_init, build_pool, first_principal_component, label_grid, make_combinatorial_pool,
    make_continuous_pool, normalized_pc1_scores,
};
pub use runner::{run_seeds, run_seeds_with, RunOutput, SeedFailure};
pub use verify::{random_instance, verify_weights, DepthTiming, RandomInstance, VerifyReport};
