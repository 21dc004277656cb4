//! Velocity and position updates.
//!
//! Regular members follow their personal best and their group memory. A group's best
//! member follows its personal best and the cell memory, and is pushed away from the best
//! memory of the other groups in its cell.
//!
//! All random factors arrive through [`Draws`] so that a single update can be replayed
//! with pinned values.

use rand::Rng as _;
use rand_distr::{Distribution, Open01};

use crate::mpb::Interval;
use crate::rng::Rng;

/// Random factors of one particle update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draws {
    pub w: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl Draws {
    /// Inertia uniform in `w_range`, `r1, r2, r3` uniform in `(0, 1)`.
    pub fn sample(rng: &mut Rng, w_range: Interval) -> Self {
        let w = if w_range.min < w_range.max {
            rng.random_range(w_range.min..=w_range.max)
        } else {
            w_range.min
        };
        Draws {
            w,
            r1: Open01.sample(rng),
            r2: Open01.sample(rng),
            r3: Open01.sample(rng),
        }
    }
}

/// `v <- w v + c1 r1 (pbest - x) + c2 r2 (sbest - x)`.
pub fn regular_velocity(
    v: &mut [f64],
    x: &[f64],
    pbest: &[f64],
    sbest: &[f64],
    (c1, c2): (f64, f64),
    d: &Draws,
) {
    for i in 0..v.len() {
        v[i] = d.w * v[i] + c1 * d.r1 * (pbest[i] - x[i]) + c2 * d.r2 * (sbest[i] - x[i]);
    }
}

/// `v <- c1 r1 (pbest - x) + c2 r2 (cbest - x) + c3 r3 (x - other) + w v`.
///
/// A missing `cbest` contributes nothing; a missing `other` (no other group in the cell)
/// drops the repulsion term.
pub fn group_best_velocity(
    v: &mut [f64],
    x: &[f64],
    pbest: &[f64],
    cbest: Option<&[f64]>,
    other: Option<&[f64]>,
    (c1, c2, c3): (f64, f64, f64),
    d: &Draws,
) {
    for i in 0..v.len() {
        let mut next = c1 * d.r1 * (pbest[i] - x[i]);
        if let Some(c) = cbest {
            next += c2 * d.r2 * (c[i] - x[i]);
        }
        if let Some(o) = other {
            next += c3 * d.r3 * (x[i] - o[i]);
        }
        v[i] = next + d.w * v[i];
    }
}

/// Clamps `v` to `[-vmax, vmax]`, then moves `x <- x + v` and clamps `x` to the range.
pub fn advance(x: &mut [f64], v: &mut [f64], vmax: f64, range: Interval) {
    for (xi, vi) in x.iter_mut().zip(v.iter_mut()) {
        *vi = vi.clamp(-vmax, vmax);
        *xi = range.clamp(*xi + *vi);
    }
}
