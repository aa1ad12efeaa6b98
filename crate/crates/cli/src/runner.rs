//! Runs every trial of an experiment grid.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::chains::{chain_options, run_trial, Chain, Instance, TrialKey, TrialRecord};
use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    /// Record wall-clock time per trial. Off, `wall_ms` is 0.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            jobs: 0,
            timing: true,
        }
    }
}

/// Grid cells in output order: by `n`, then `eps`, seed and trial.
pub fn trial_keys(cfg: &ExperimentConfig) -> Vec<TrialKey> {
    let mut keys = Vec::with_capacity(cfg.row_count());
    for &n in &cfg.dims {
        for (eps_index, &eps) in cfg.eps.iter().enumerate() {
            for &seed in &cfg.seeds {
                for trial in 0..cfg.trials {
                    keys.push(TrialKey {
                        n,
                        eps_index,
                        eps,
                        seed,
                        trial,
                    });
                }
            }
        }
    }
    keys
}

pub fn run_experiment(
    cfg: &ExperimentConfig,
    chain: Chain,
    options: RunOptions,
) -> Result<Vec<TrialRecord>, rayon::ThreadPoolBuildError> {
    let keys = trial_keys(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()?;
    // Indexed parallel iterators keep the input order on collect.
    let cells: Vec<(usize, u64)> = cfg
        .dims
        .iter()
        .flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let mut records: Vec<TrialRecord> = pool.install(|| {
        let instances: HashMap<(usize, u64), _> = cells
            .par_iter()
            .map(|&(n, seed)| ((n, seed), Instance::build(cfg, n, seed)))
            .collect();
        keys.par_iter()
            .map(|&key| {
                let options = chain_options(cfg, key.trial_stream().child(1));
                run_trial(chain, key, &instances[&(key.n, key.seed)], options)
            })
            .collect()
    });
    if !options.timing {
        records.iter_mut().for_each(|r| r.wall_ms = 0.0);
    }
    Ok(records)
}
