//! Offline error and per-experiment statistics.
//!
//! The offline error of a run is the mean, over every landscape evaluation, of the gap
//! between the current true optimum and the best fitness the optimizer knows at that
//! evaluation.

use crate::error::Error;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OfflineErrorAccumulator {
    error_sum: f64,
    samples: u64,
}

impl OfflineErrorAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_sample(&mut self, best_found: f64, optimum: f64) -> Result<(), Error> {
        if optimum < best_found {
            return Err(Error::Consistency(
                "best-found fitness exceeds the current optimum (stale optimum?)",
            ));
        }
        self.error_sum += optimum - best_found;
        self.samples += 1;
        Ok(())
    }

    pub fn error_sum(&self) -> f64 {
        self.error_sum
    }

    pub fn sample_count(&self) -> u64 {
        self.samples
    }

    pub fn finalize(&self) -> Result<f64, Error> {
        if self.samples == 0 {
            return Err(Error::Usage("offline error of an empty run"));
        }
        Ok(self.error_sum / self.samples as f64)
    }
}

/// Mean offline error over independent runs with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunStatistics {
    pub mean_offline_error: f64,
    /// Sample standard deviation over `sqrt(run_count)`; 0 for a single run.
    pub std_error: f64,
    pub run_count: usize,
}

pub fn aggregate(offline_errors: &[f64]) -> Result<RunStatistics, Error> {
    let n = offline_errors.len();
    if n == 0 {
        return Err(Error::Usage("cannot aggregate an empty list of runs"));
    }
    let mean = offline_errors.iter().sum::<f64>() / n as f64;
    // a single run has no sample deviation; report 0
    let std_error = if n < 2 {
        0.0
    } else {
        let ss: f64 = offline_errors.iter().map(|e| (e - mean) * (e - mean)).sum();
        libm::sqrt(ss / (n - 1) as f64) / libm::sqrt(n as f64)
    };
    Ok(RunStatistics {
        mean_offline_error: mean,
        std_error,
        run_count: n,
    })
}
