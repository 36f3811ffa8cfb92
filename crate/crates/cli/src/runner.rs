//! Parallel execution of benchmark protocols.
//!
//! Runs are independent given their seeds, and reduction sorts by run index,
//! so results are bitwise identical to the sequential core functions for any
//! thread count.

use causal_ssl_core::bench::{
    ablation_run, aggregate, aggregate_ablation, run_once, BenchReport, PairedReport, Protocol, RunOutcome,
};
use rayon::prelude::*;

use crate::CliError;

pub const THREADS_VAR: &str = "CAUSAL_SSL_THREADS";

/// Thread cap from `CAUSAL_SSL_THREADS`. `None` lets rayon decide.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Config(format!("{THREADS_VAR} must be a non-negative integer, got {v:?}"))),
        },
    }
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))
}

pub fn run_protocol(p: &Protocol, threads: Option<usize>) -> Result<BenchReport, CliError> {
    p.validate()?;
    let outcomes: Vec<RunOutcome> = pool(threads)?.install(|| (0..p.runs).into_par_iter().map(|r| run_once(p, r)).collect());
    Ok(aggregate(&p.dataset_label(), &p.methods, &outcomes))
}

pub fn ablate_swap_roles(p: &Protocol, threads: Option<usize>) -> Result<PairedReport, CliError> {
    p.validate()?;
    if !p.methods.iter().any(|m| m.uses_partition()) {
        return Err(CliError::Config("the ablation needs at least one partition-using method".into()));
    }
    let outcomes: Vec<_> = pool(threads)?.install(|| (0..p.runs).into_par_iter().map(|r| ablation_run(p, r)).collect());
    Ok(aggregate_ablation(p, &outcomes))
}
