//! Runs the `{f} x {m}` grid.

use std::time::Instant;

use cpsoc_core::{aggregate, run_single};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::HarnessError;

/// Aggregate of the independent runs at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub f: u64,
    pub m: usize,
    pub mean_offline_error: f64,
    pub std_error: f64,
    pub runs: usize,
    pub wall_time_s: f64,
}

/// Offline error of one seeded run at `(f, m)`.
pub fn run_point(config: &ExperimentConfig, f: u64, m: usize, seed: u64) -> Result<f64, HarnessError> {
    run_single(&config.run_config(f, m), seed)
        .map(|outcome| outcome.offline_error)
        .map_err(|source| HarnessError::Run { f, m, seed, source })
}

/// Runs every grid point in `(f, m)` order, calling `progress` after each row.
///
/// Runs of one point execute in parallel; their results are joined in seed order, so
/// the rows do not depend on scheduling.
pub fn run_grid(
    config: &ExperimentConfig,
    mut progress: impl FnMut(&ResultRow),
) -> Result<Vec<ResultRow>, HarnessError> {
    config.validate()?;
    let mut rows = Vec::new();
    for &f in &config.sweep.change_frequencies {
        for &m in &config.sweep.peak_counts {
            let started = Instant::now();
            let errors = (0..config.runs)
                .into_par_iter()
                .map(|run| run_point(config, f, m, config.seed(run)))
                .collect::<Result<Vec<f64>, _>>()?;
            let stats = aggregate(&errors).expect("at least one run");
            let row = ResultRow {
                f,
                m,
                mean_offline_error: stats.mean_offline_error,
                std_error: stats.std_error,
                runs: stats.run_count,
                wall_time_s: if config.record_wall_time {
                    started.elapsed().as_secs_f64()
                } else {
                    0.0
                },
            };
            progress(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}
