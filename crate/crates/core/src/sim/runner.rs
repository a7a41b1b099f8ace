use rayon::prelude::*;

use super::config::SeedRange;
use super::experiment::{run_experiment, ExperimentContext, StepRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: Error,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    /// Records of successful seeds, in seed order.
    pub records: Vec<StepRecord>,
    pub failures: Vec<SeedFailure>,
}

/// Runs every seed on a pool of `threads` workers. Output order does not
/// depend on `threads`.
pub fn run_seeds(ctx: &ExperimentContext, seeds: SeedRange, threads: usize) -> Result<RunOutput> {
    run_seeds_with(ctx, seeds, threads, |_, _| {})
}

/// As [`run_seeds`], calling `on_done(seed, ok)` as each seed finishes.
pub fn run_seeds_with<F>(
    ctx: &ExperimentContext,
    seeds: SeedRange,
    threads: usize,
    on_done: F,
) -> Result<RunOutput>
where
    F: Fn(u64, bool) + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))?;
    let seeds: Vec<u64> = seeds.iter().collect();
    let results: Vec<(u64, Result<Vec<StepRecord>>)> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| {
                let r = run_experiment(ctx, s);
                on_done(s, r.is_ok());
                (s, r)
            })
            .collect()
    });
    let mut out = RunOutput::default();
    for (seed, r) in results {
        match r {
            Ok(mut recs) => out.records.append(&mut recs),
            Err(error) => out.failures.push(SeedFailure { seed, error }),
        }
    }
    Ok(out)
}
