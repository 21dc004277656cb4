//! Experiment configuration: one TOML file, every section optional.
//!
//! Missing keys take their built-in defaults; unknown keys are rejected.

use std::path::Path;

use cpsoc_core::{GridParams, MpbParams, PsoParams, RefinerParams, RunConfig};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// The `{f} x {m}` grid swept by `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub change_frequencies: Vec<u64>,
    pub peak_counts: Vec<usize>,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep {
            change_frequencies: vec![500, 1000, 2500, 5000],
            peak_counts: vec![1, 5, 10, 20, 30, 40, 50, 100, 200],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub changes_per_run: u64,
    pub base_seed: u64,
    /// Write measured wall-clock seconds into the results. Off by default so that the
    /// same config always yields the same bytes.
    pub record_wall_time: bool,
    pub sweep: Sweep,
    pub mpb: MpbParams,
    pub pso: PsoParams,
    pub grid: GridParams,
    pub refiner: RefinerParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            runs: 30,
            changes_per_run: 100,
            base_seed: 0,
            record_wall_time: false,
            sweep: Sweep::default(),
            mpb: MpbParams::default(),
            pso: PsoParams::default(),
            grid: GridParams::default(),
            refiner: RefinerParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::from_toml(&text).map_err(|source| HarnessError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// The single-run configuration for one `(f, m)` grid point.
    pub fn run_config(&self, f: u64, m: usize) -> RunConfig {
        RunConfig {
            mpb: MpbParams {
                change_frequency: f,
                num_peaks: m,
                ..self.mpb.clone()
            },
            pso: self.pso.clone(),
            grid: self.grid.clone(),
            refiner: self.refiner.clone(),
            changes_per_run: self.changes_per_run,
        }
    }

    /// Checks the harness settings and every grid point.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs < 1 {
            return Err(HarnessError::config("runs", "must be at least 1"));
        }
        if self.sweep.change_frequencies.is_empty() {
            return Err(HarnessError::config("sweep.change_frequencies", "must not be empty"));
        }
        if self.sweep.peak_counts.is_empty() {
            return Err(HarnessError::config("sweep.peak_counts", "must not be empty"));
        }
        for &f in &self.sweep.change_frequencies {
            for &m in &self.sweep.peak_counts {
                self.run_config(f, m).validate()?;
            }
        }
        Ok(())
    }

    /// Seed of run `k`.
    pub fn seed(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }
}
