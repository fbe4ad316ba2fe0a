//! Empirical satisfaction rate of the graph condition on `G(n, p)` digraphs.
//!
//! Exploratory only: no threshold value is asserted.

use iabc_core::checker::{check_degree, check_partition_condition_with, CheckOptions};
use iabc_core::generate::erdos_renyi;
use iabc_core::CheckError;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n: usize,
    pub f: usize,
    pub p_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub max_n: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("edge probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("need n >= 2, got {0}")]
    TooFewNodes(usize),
    #[error(transparent)]
    Check(#[from] CheckError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub trials: usize,
    pub satisfied: usize,
}

impl SweepRow {
    pub fn rate(&self) -> f64 {
        self.satisfied as f64 / self.trials as f64
    }
}

/// Seed of trial `trial` at grid index `p_index`.
pub fn trial_seed(seed: u64, p_index: usize, trial: usize) -> u64 {
    seed ^ ((p_index as u64) << 40) ^ trial as u64
}

/// Trials run in parallel; rows come back in `p_grid` order.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    if spec.trials == 0 {
        return Err(SweepError::NoTrials);
    }
    if spec.n < 2 {
        return Err(SweepError::TooFewNodes(spec.n));
    }
    if let Some(&p) = spec.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(SweepError::Probability(p));
    }
    let opts = CheckOptions {
        max_n: spec.max_n,
        all_witnesses: false,
    };
    if spec.n > spec.max_n.min(iabc_core::checker::HARD_MAX_N) {
        return Err(CheckError::TooLarge {
            n: spec.n,
            cap: spec.max_n,
        }
        .into());
    }

    let jobs: Vec<(usize, usize)> = (0..spec.p_grid.len())
        .flat_map(|pi| (0..spec.trials).map(move |t| (pi, t)))
        .collect();
    let outcomes: Vec<Result<bool, SweepError>> = jobs
        .par_iter()
        .map(|&(pi, t)| {
            let g = erdos_renyi(spec.n, spec.p_grid[pi], trial_seed(spec.seed, pi, t))
                .map_err(|e| SweepError::Probability(e.0))?;
            if !check_degree(&g, spec.f) {
                return Ok(false);
            }
            Ok(check_partition_condition_with(&g, spec.f, &opts)?.partition_ok)
        })
        .collect();

    let mut rows: Vec<SweepRow> = spec
        .p_grid
        .iter()
        .map(|&p| SweepRow {
            p,
            trials: spec.trials,
            satisfied: 0,
        })
        .collect();
    for (&(pi, _), outcome) in jobs.iter().zip(outcomes) {
        if outcome? {
            rows[pi].satisfied += 1;
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("p,trials,satisfied,rate\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.p,
            r.trials,
            r.satisfied,
            r.rate()
        ));
    }
    out
}
