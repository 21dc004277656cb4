//! Cellular-automaton partition of the search box.
//!
//! The box `A^D` is split into `K` equal slabs per dimension, `K^D` cells in total.
//! Boundaries do not wrap: edge cells have fewer neighbors.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::mpb::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Topology {
    /// All cells within Chebyshev distance `r`.
    Moore,
    /// All cells within Manhattan distance `r`.
    VonNeumann,
}

/// The grid settings that come from configuration; dimensions and range come from the
/// landscape.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GridParams {
    pub divisions_per_dim: usize,
    pub topology: Topology,
    pub neighborhood_radius: usize,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            divisions_per_dim: 5,
            topology: Topology::Moore,
            neighborhood_radius: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub divisions: usize,
    pub dimensions: usize,
    pub search_range: Interval,
    pub topology: Topology,
    pub radius: usize,
}

/// Integer coordinates of one cell, each in `[0, K-1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellIndex {
    pub coords: Vec<usize>,
}

/// The grid of the default landscape.
impl Default for GridSpec {
    fn default() -> Self {
        let mpb = crate::mpb::MpbParams::default();
        GridSpec::new(&GridParams::default(), mpb.dimensions, mpb.search_range)
            .expect("default grid is valid")
    }
}

impl GridSpec {
    pub fn new(params: &GridParams, dimensions: usize, search_range: Interval) -> Result<Self, Error> {
        if params.divisions_per_dim < 1 {
            return Err(Error::config("grid.divisions_per_dim", "must be at least 1"));
        }
        if dimensions < 1 {
            return Err(Error::config("mpb.dimensions", "must be at least 1"));
        }
        if !(search_range.min < search_range.max) {
            return Err(Error::config("mpb.search_range", "min must be below max"));
        }
        let total = (params.divisions_per_dim as u128).checked_pow(dimensions as u32);
        if total.is_none_or(|t| t > usize::MAX as u128) {
            return Err(Error::config("grid.divisions_per_dim", "too many cells for this dimension"));
        }
        Ok(GridSpec {
            divisions: params.divisions_per_dim,
            dimensions,
            search_range,
            topology: params.topology,
            radius: params.neighborhood_radius,
        })
    }

    /// Width of one cell along any axis.
    pub fn cell_width(&self) -> f64 {
        self.search_range.width() / self.divisions as f64
    }

    pub fn cell_count(&self) -> usize {
        self.divisions.pow(self.dimensions as u32)
    }

    /// The cell containing `x`. The upper face of the box belongs to the last cell.
    pub fn cell_of(&self, x: &[f64]) -> Result<CellIndex, Error> {
        if x.len() != self.dimensions {
            return Err(Error::Usage("point dimension does not match the grid"));
        }
        let a = self.search_range;
        let width = self.cell_width();
        let last = self.divisions - 1;
        let coords = x
            .iter()
            .map(|&v| {
                if !a.contains(v) {
                    return Err(Error::Usage("point lies outside the search range"));
                }
                let k = libm::floor((v - a.min) / width);
                Ok((k as usize).min(last))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CellIndex { coords })
    }

    /// Linear index of the cell containing `x`; see [`GridSpec::cell_of`].
    pub fn linear_of(&self, x: &[f64]) -> Result<usize, Error> {
        if x.len() != self.dimensions {
            return Err(Error::Usage("point dimension does not match the grid"));
        }
        let a = self.search_range;
        let width = self.cell_width();
        let last = self.divisions - 1;
        x.iter().try_fold(0, |acc, &v| {
            if !a.contains(v) {
                return Err(Error::Usage("point lies outside the search range"));
            }
            let k = (libm::floor((v - a.min) / width) as usize).min(last);
            Ok(acc * self.divisions + k)
        })
    }

    /// Row-major linear index of `c` (first coordinate most significant).
    pub fn linear(&self, c: &CellIndex) -> usize {
        c.coords.iter().fold(0, |acc, &k| acc * self.divisions + k)
    }

    pub fn from_linear(&self, mut index: usize) -> CellIndex {
        let mut coords = vec![0; self.dimensions];
        for slot in coords.iter_mut().rev() {
            *slot = index % self.divisions;
            index /= self.divisions;
        }
        CellIndex { coords }
    }

    pub fn is_valid(&self, c: &CellIndex) -> bool {
        c.coords.len() == self.dimensions && c.coords.iter().all(|&k| k < self.divisions)
    }

    /// Bounds of slab `k` along any axis. The last slab ends exactly at the range maximum.
    pub fn slab(&self, k: usize) -> (f64, f64) {
        let a = self.search_range;
        let width = self.cell_width();
        let hi = if k + 1 == self.divisions { a.max } else { a.min + (k + 1) as f64 * width };
        (a.min + k as f64 * width, hi)
    }

    /// Lower and upper corners of the cell box.
    pub fn cell_box(&self, c: &CellIndex) -> (Vec<f64>, Vec<f64>) {
        c.coords.iter().map(|&k| self.slab(k)).unzip()
    }

    /// Offsets of the neighborhood under the configured topology and radius, excluding
    /// the zero offset, in lexicographic order.
    pub fn neighbor_offsets(&self) -> Vec<Vec<isize>> {
        let r = self.radius as isize;
        let span = (2 * r + 1) as usize;
        let dims = self.dimensions;
        let total = span.pow(dims as u32);
        let mut out = Vec::new();
        for n in 0..total {
            let mut offset = vec![0isize; dims];
            let mut rest = n;
            for slot in offset.iter_mut().rev() {
                *slot = (rest % span) as isize - r;
                rest /= span;
            }
            if offset.iter().all(|&o| o == 0) {
                continue;
            }
            if self.topology == Topology::VonNeumann
                && offset.iter().map(|o| o.unsigned_abs()).sum::<usize>() > self.radius
            {
                continue;
            }
            out.push(offset);
        }
        out
    }

    /// Neighborhood of `c` under the configured topology and radius, excluding `c`.
    /// Cells past the grid boundary are dropped. Returned in lexicographic order.
    pub fn neighbors(&self, c: &CellIndex) -> Vec<CellIndex> {
        let k = self.divisions as isize;
        self.neighbor_offsets()
            .iter()
            .filter_map(|offset| {
                c.coords
                    .iter()
                    .zip(offset)
                    .map(|(&v, &o)| {
                        let n = v as isize + o;
                        (0..k).contains(&n).then_some(n as usize)
                    })
                    .collect::<Option<Vec<usize>>>()
                    .map(|coords| CellIndex { coords })
            })
            .collect()
    }
}
