//! Thread pool and deterministic parallel reductions.
//!
//! Work is cut into the same batches (Monte Carlo) or chunks (trajectory
//! ensembles) the serial drivers use, and partial results are merged in
//! index order, so the answer does not depend on the thread count.

use rayon::prelude::*;

use qrcsl_core::numerics::montecarlo::{batch_count, merge_batches, run_batch, McRng};
use qrcsl_core::numerics::McEstimate;
use qrcsl_core::trajectories::{
    chunk_count, run_trajectory_chunk, validate_ensemble, CollapseOperatorSet, EnsembleAccumulator, EnsembleConfig,
    EnsembleStats, StateVector,
};

use crate::error::LabError;

/// Caps the worker count; `1` forces serial execution.
pub const THREADS_ENV: &str = "QRCSL_THREADS";

/// Worker count from the environment, `None` for rayon's default.
pub fn threads_from_env() -> Result<Option<usize>, LabError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(LabError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Run `f` inside a pool with `threads` workers (default when `None`).
pub fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, LabError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| LabError::Usage(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Parallel counterpart of `mc_integrate`, bit-identical to it.
pub fn mc_integrate_par<S>(sample: S, n_samples: u64, seed: u64) -> qrcsl_core::Result<McEstimate>
where
    S: Fn(&mut McRng) -> f64 + Sync,
{
    if n_samples < 2 {
        return Err(qrcsl_core::Error::TooFewSamples(n_samples));
    }
    let batches: Vec<_> = (0..batch_count(n_samples))
        .into_par_iter()
        .map(|b| run_batch(&sample, n_samples, seed, b))
        .collect();
    merge_batches(&batches).finish(seed)
}

/// Parallel counterpart of `run_ensemble`, bit-identical to it.
pub fn run_ensemble_par(
    initial: &StateVector,
    ops: &CollapseOperatorSet,
    config: &EnsembleConfig,
) -> qrcsl_core::Result<EnsembleStats> {
    validate_ensemble(config)?;
    let chunks: Vec<_> = (0..chunk_count(config))
        .into_par_iter()
        .map(|c| run_trajectory_chunk(initial, ops, config, c))
        .collect();
    let mut total = EnsembleAccumulator::new(ops.grid().n_points());
    for chunk in chunks {
        total.merge(&chunk?);
    }
    total.finish(config, ops.grid().dt())
}
