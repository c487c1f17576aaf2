//! Parallel experiment execution.
//!
//! Realizations fan out over a rayon pool and are collected by index before
//! pooling, so the outputs are identical to a sequential run whatever the
//! worker count. `MMIMO_WORKERS` pins the pool size.

use mmimo::montecarlo::{
    pool_outputs, run_realization, CdfSummary, ExperimentPlan, RealizationOutput,
};
use rayon::prelude::*;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "MMIMO_WORKERS";

fn worker_count() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
}

/// Run all realizations of a plan on a local thread pool, returning them in
/// index order.
pub fn run_outputs(plan: &ExperimentPlan) -> mmimo::Result<Vec<RealizationOutput>> {
    plan.validate()?;
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = worker_count() {
            builder = builder.num_threads(n);
        }
        builder
            .build()
            .map_err(|e| mmimo::Error::config(format!("thread pool: {e}")))
    }?;

    pool.install(|| {
        (0..plan.n_largescale)
            .into_par_iter()
            .map(|index| run_realization(plan, index))
            .collect()
    })
}

/// Run and pool in one step.
pub fn run_parallel(plan: &ExperimentPlan) -> mmimo::Result<Vec<CdfSummary>> {
    let outputs = run_outputs(plan)?;
    pool_outputs(plan, &outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mmimo::montecarlo::plan_for;
    use mmimo::prelude::*;

    #[test]
    fn parallel_matches_sequential_bitwise() {
        let plan = plan_for(
            MorphologyParams::preset(Morphology::Urban),
            Deployment::CellFree,
            Decoder::Zf,
            &[PowerTag::Full, PowerTag::MaxMin],
            24,
            6,
            8,
            30,
            123,
        );
        let sequential = run_experiment(&plan).unwrap();
        let parallel = run_parallel(&plan).unwrap();
        assert_eq!(sequential.len(), parallel.len());
        for (a, b) in sequential.iter().zip(&parallel) {
            assert_eq!(a.samples, b.samples);
            assert_eq!(a.percentile_values, b.percentile_values);
        }
    }
}
