//! One run of the offline-error protocol.
//!
//! The landscape is wrapped in a [`Metered`] evaluator that samples the offline error
//! after every evaluation and applies environment changes exactly on schedule (right after
//! the evaluation that brings the count to a multiple of the change frequency). A step
//! under way stops moving particles at that point, and the engine handles the change
//! before its next step.

use crate::engine::{EngineState, PsoParams};
use crate::error::Error;
use crate::fitness::Fitness;
use crate::grid::{GridParams, GridSpec};
use crate::metrics::OfflineErrorAccumulator;
use crate::mpb::{Landscape, MpbParams};
use crate::refiner::RefinerParams;
use crate::rng::{self, Stream};

/// Everything one run needs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RunConfig {
    pub mpb: MpbParams,
    pub pso: PsoParams,
    pub grid: GridParams,
    pub refiner: RefinerParams,
    pub changes_per_run: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mpb: MpbParams::default(),
            pso: PsoParams::default(),
            grid: GridParams::default(),
            refiner: RefinerParams::default(),
            changes_per_run: 100,
        }
    }
}

impl RunConfig {
    pub fn grid_spec(&self) -> Result<GridSpec, Error> {
        GridSpec::new(&self.grid, self.mpb.dimensions, self.mpb.search_range)
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.mpb.validate()?;
        self.grid_spec()?;
        self.pso.validate()?;
        self.refiner.validate()?;
        if self.changes_per_run < 1 {
            return Err(Error::config("changes_per_run", "must be at least 1"));
        }
        Ok(())
    }

    /// Evaluations covered by the offline error: `changes_per_run * f`.
    pub fn horizon(&self) -> u64 {
        self.changes_per_run * self.mpb.change_frequency
    }
}

/// Landscape wrapper that meters every evaluation.
///
/// The best fitness known to the optimizer is tracked as the best value evaluated since
/// the last change: every such value enters a particle, group or cell memory by the end of
/// the step that produced it, and memories are rebuilt from scratch on a change.
pub struct Metered<'a> {
    landscape: &'a mut Landscape,
    accumulator: OfflineErrorAccumulator,
    best_since_change: f64,
    optimum: f64,
    horizon: u64,
    max_changes: u64,
    unhandled_changes: u64,
    error: Option<Error>,
}

impl<'a> Metered<'a> {
    pub fn new(landscape: &'a mut Landscape, horizon: u64, max_changes: u64) -> Self {
        let optimum = landscape.current_optimum().1;
        Metered {
            landscape,
            accumulator: OfflineErrorAccumulator::new(),
            best_since_change: f64::NEG_INFINITY,
            optimum,
            horizon,
            max_changes,
            unhandled_changes: 0,
            error: None,
        }
    }

    pub fn landscape(&self) -> &Landscape {
        self.landscape
    }

    pub fn evaluations(&self) -> u64 {
        self.landscape.eval_count()
    }

    pub fn best_since_change(&self) -> f64 {
        self.best_since_change
    }

    pub fn accumulator(&self) -> &OfflineErrorAccumulator {
        &self.accumulator
    }

    /// Returns true (once per change) if the environment changed since the last call.
    pub fn take_change_notice(&mut self) -> bool {
        if self.unhandled_changes > 0 {
            self.unhandled_changes = 0;
            true
        } else {
            false
        }
    }

    /// The first bookkeeping error seen, if any.
    pub fn error(&self) -> Option<&Error> {
        self.error.as_ref()
    }

    pub fn finish(self) -> Result<f64, Error> {
        if let Some(e) = self.error {
            return Err(e);
        }
        self.accumulator.finalize()
    }
}

impl Fitness for Metered<'_> {
    fn dimensions(&self) -> usize {
        self.landscape.params().dimensions
    }

    fn evaluate(&mut self, x: &[f64]) -> f64 {
        let value = Fitness::evaluate(&mut *self.landscape, x);
        if self.landscape.eval_count() <= self.horizon {
            self.best_since_change = self.best_since_change.max(value);
            if let Err(e) = self.accumulator.record_sample(self.best_since_change, self.optimum) {
                self.error.get_or_insert(e);
            }
        }
        if self.landscape.pending_change() && self.landscape.change_count() < self.max_changes {
            self.landscape.apply_change();
            self.optimum = self.landscape.current_optimum().1;
            self.best_since_change = f64::NEG_INFINITY;
            self.unhandled_changes += 1;
        }
        value
    }

    fn change_pending(&self) -> bool {
        self.unhandled_changes > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub offline_error: f64,
    pub evaluations: u64,
    pub changes: u64,
}

/// Runs one seeded experiment until `changes_per_run` changes have been applied and
/// `changes_per_run * f` evaluations sampled.
pub fn run_single(config: &RunConfig, seed: u64) -> Result<RunOutcome, Error> {
    config.validate()?;
    let grid = config.grid_spec()?;
    let mut landscape = Landscape::with_rng(config.mpb.clone(), rng::stream(seed, Stream::Landscape))?;
    let horizon = config.horizon();
    let mut metered = Metered::new(&mut landscape, horizon, config.changes_per_run);
    let mut engine = EngineState::new(
        config.pso.clone(),
        config.refiner.clone(),
        grid,
        &mut metered,
        rng::stream(seed, Stream::Optimizer),
    )?;
    engine.set_change_period(config.mpb.change_frequency);
    while metered.evaluations() < horizon {
        if metered.take_change_notice() {
            engine.handle_change(&mut metered);
        } else {
            engine.step(&mut metered);
        }
    }
    let offline_error = metered.finish()?;
    Ok(RunOutcome {
        offline_error,
        evaluations: landscape.eval_count(),
        changes: landscape.change_count(),
    })
}
