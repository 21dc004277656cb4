//! Moving Peaks Benchmark with cone-shaped peaks.
//!
//! A landscape is the upper envelope of `m` cones
//! `f_p(x) = height_p - width_p * |x - center_p|`. Every `f` evaluations the harness
//! calls [`Landscape::apply_change`], which perturbs heights and widths with Gaussian
//! noise and moves every center by a vector of fixed length.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Error;
use crate::fitness::Fitness;
use crate::rng::{self, Rng, Stream};
use crate::vector::{distance, norm, reflect};

/// A closed interval `[min, max]`, written as a two-element array in config files.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(from = "[f64; 2]", into = "[f64; 2]"))]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub const fn new(min: f64, max: f64) -> Self {
        Interval { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

impl From<[f64; 2]> for Interval {
    fn from([min, max]: [f64; 2]) -> Self {
        Interval { min, max }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.min, i.max]
    }
}

/// Landscape parameters. [`Default`] gives the standard scenario:
/// 10 cones in `[0, 100]^5`, a change every 5000 evaluations.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct MpbParams {
    pub num_peaks: usize,
    /// Evaluations between consecutive changes.
    pub change_frequency: u64,
    pub height_severity: f64,
    pub width_severity: f64,
    pub shift_length: f64,
    pub dimensions: usize,
    pub height_range: Interval,
    pub width_range: Interval,
    pub initial_height: f64,
    pub search_range: Interval,
    /// Correlation `lambda` between consecutive shifts of one peak; 0 is uncorrelated.
    pub shift_correlation: f64,
}

impl Default for MpbParams {
    fn default() -> Self {
        MpbParams {
            num_peaks: 10,
            change_frequency: 5000,
            height_severity: 7.0,
            width_severity: 1.0,
            shift_length: 1.0,
            dimensions: 5,
            height_range: Interval::new(30.0, 70.0),
            width_range: Interval::new(1.0, 12.0),
            initial_height: 50.0,
            search_range: Interval::new(0.0, 100.0),
            shift_correlation: 0.0,
        }
    }
}

impl MpbParams {
    pub fn validate(&self) -> Result<(), Error> {
        if self.num_peaks < 1 {
            return Err(Error::config("mpb.num_peaks", "must be at least 1"));
        }
        if self.dimensions < 1 {
            return Err(Error::config("mpb.dimensions", "must be at least 1"));
        }
        if self.change_frequency < 1 {
            return Err(Error::config("mpb.change_frequency", "must be at least 1"));
        }
        if !(self.height_range.min <= self.height_range.max) {
            return Err(Error::config("mpb.height_range", "min must not exceed max"));
        }
        if !self.height_range.contains(self.initial_height) {
            return Err(Error::config("mpb.initial_height", "must lie inside height_range"));
        }
        if !(self.width_range.min > 0.0) {
            return Err(Error::config("mpb.width_range", "min must be positive"));
        }
        if !(self.width_range.min <= self.width_range.max) {
            return Err(Error::config("mpb.width_range", "min must not exceed max"));
        }
        if !(self.search_range.min < self.search_range.max) {
            return Err(Error::config("mpb.search_range", "min must be below max"));
        }
        if !(0.0..=1.0).contains(&self.shift_correlation) {
            return Err(Error::config("mpb.shift_correlation", "must lie in [0, 1]"));
        }
        if !(self.height_severity >= 0.0) {
            return Err(Error::config("mpb.height_severity", "must be non-negative"));
        }
        if !(self.width_severity >= 0.0) {
            return Err(Error::config("mpb.width_severity", "must be non-negative"));
        }
        if !(self.shift_length >= 0.0) {
            return Err(Error::config("mpb.shift_length", "must be non-negative"));
        }
        Ok(())
    }
}

/// One cone.
#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    pub center: Vec<f64>,
    pub height: f64,
    pub width: f64,
    pub last_shift: Vec<f64>,
}

impl Peak {
    /// Cone value at `x`.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.height - self.width * distance(x, &self.center)
    }
}

/// The full benchmark state.
#[derive(Debug, Clone)]
pub struct Landscape {
    params: MpbParams,
    peaks: Vec<Peak>,
    eval_count: u64,
    change_count: u64,
    rng: Rng,
}

impl Landscape {
    /// Builds a landscape from its own private stream of `seed`.
    pub fn new(params: MpbParams, seed: u64) -> Result<Self, Error> {
        Self::with_rng(params, rng::stream(seed, Stream::Landscape))
    }

    pub fn with_rng(params: MpbParams, mut rng: Rng) -> Result<Self, Error> {
        params.validate()?;
        let a = params.search_range;
        let w = params.width_range;
        let peaks = (0..params.num_peaks)
            .map(|_| {
                let center = (0..params.dimensions)
                    .map(|_| rng.random_range(a.min..=a.max))
                    .collect();
                let width = if w.min < w.max {
                    rng.random_range(w.min..=w.max)
                } else {
                    w.min
                };
                Peak {
                    center,
                    height: params.initial_height,
                    width,
                    last_shift: vec![0.0; params.dimensions],
                }
            })
            .collect();
        Ok(Landscape {
            params,
            peaks,
            eval_count: 0,
            change_count: 0,
            rng,
        })
    }

    /// Builds a landscape with explicit peaks, e.g. for hand-made test cases.
    pub fn from_peaks(params: MpbParams, peaks: Vec<Peak>, seed: u64) -> Result<Self, Error> {
        params.validate()?;
        if peaks.is_empty() {
            return Err(Error::config("peaks", "must not be empty"));
        }
        if peaks.iter().any(|p| p.center.len() != params.dimensions) {
            return Err(Error::Usage("peak center dimension does not match params"));
        }
        Ok(Landscape {
            params: MpbParams {
                num_peaks: peaks.len(),
                ..params
            },
            peaks,
            eval_count: 0,
            change_count: 0,
            rng: rng::stream(seed, Stream::Landscape),
        })
    }

    pub fn params(&self) -> &MpbParams {
        &self.params
    }

    pub fn peaks(&self) -> &[Peak] {
        &self.peaks
    }

    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    pub fn change_count(&self) -> u64 {
        self.change_count
    }

    /// Fitness at `x`; counts one evaluation.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64, Error> {
        if x.len() != self.params.dimensions {
            return Err(Error::Usage("point dimension does not match the landscape"));
        }
        self.eval_count += 1;
        Ok(self.peak_envelope(x))
    }

    fn peak_envelope(&self, x: &[f64]) -> f64 {
        self.peaks
            .iter()
            .map(|p| p.value_at(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Position and value of the global optimum. Not counted as an evaluation.
    ///
    /// For cones the optimum is the apex of the highest peak: any other cone is at most
    /// its own height there.
    pub fn current_optimum(&self) -> (Vec<f64>, f64) {
        let mut best = &self.peaks[0];
        for p in &self.peaks[1..] {
            if p.height > best.height {
                best = p;
            }
        }
        (best.center.clone(), self.peak_envelope(&best.center))
    }

    /// True once the next change is due.
    pub fn pending_change(&self) -> bool {
        self.eval_count >= (self.change_count + 1) * self.params.change_frequency
    }

    /// Moves, reshapes and re-heightens every peak.
    pub fn apply_change(&mut self) {
        let p = &self.params;
        let dims = p.dimensions;
        let lambda = p.shift_correlation;
        let mut fresh = vec![0.0; dims];
        for peak in &mut self.peaks {
            for r in fresh.iter_mut() {
                *r = self.rng.random::<f64>() - 0.5;
            }
            let mut shift: Vec<f64> = fresh
                .iter()
                .zip(&peak.last_shift)
                .map(|(r, prev)| (1.0 - lambda) * r + lambda * prev)
                .collect();
            let len = norm(&shift);
            if len > 0.0 {
                shift.iter_mut().for_each(|s| *s *= p.shift_length / len);
            } else {
                shift.iter_mut().for_each(|s| *s = 0.0);
            }

            let g: f64 = StandardNormal.sample(&mut self.rng);
            let g_width: f64 = StandardNormal.sample(&mut self.rng);
            peak.height = reflect(
                peak.height + p.height_severity * g,
                p.height_range.min,
                p.height_range.max,
            );
            peak.width = reflect(
                peak.width + p.width_severity * g_width,
                p.width_range.min,
                p.width_range.max,
            );

            let a = p.search_range;
            for (c, s) in peak.center.iter_mut().zip(shift.iter_mut()) {
                let moved = *c + *s;
                if !a.contains(moved) {
                    *s = -*s;
                }
                *c = reflect(moved, a.min, a.max);
            }
            peak.last_shift = shift;
        }
        self.change_count += 1;
    }
}

impl Fitness for Landscape {
    fn dimensions(&self) -> usize {
        self.params.dimensions
    }

    fn evaluate(&mut self, x: &[f64]) -> f64 {
        Landscape::evaluate(self, x).expect("point dimension does not match the landscape")
    }
}
