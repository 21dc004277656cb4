//! Cellular multi-swarm particle swarm optimization with clonal-selection
//! refinement, for dynamic landscapes.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every algorithmic piece:
//!
//! - [`mpb`]: the Moving Peaks Benchmark with cone peaks.
//! - [`grid`]: the cellular-automaton partition of the search box.
//! - [`engine`]: the per-cell clustered swarms and their memories.
//! - [`refiner`]: clonal selection plus the coordinate-wise direction/magnitude search
//!   applied to cell memories after every environment change.
//! - [`metrics`]: offline error and run statistics.
//! - [`experiment`]: the single-run protocol that ties the landscape, engine and metrics
//!   together on a fixed evaluation schedule.
//!
//! File formats, the CLI and the experiment grid live in the `cpsoc-harness` crate.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style checks reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod engine;
pub mod error;
pub mod experiment;
pub mod fitness;
pub mod grid;
pub mod metrics;
pub mod mpb;
pub mod refiner;
pub mod rng;

mod vector;

pub use engine::{ChangeReport, EngineState, PsoParams, RefinedCell};
pub use error::Error;
pub use experiment::{run_single, Metered, RunConfig, RunOutcome};
pub use fitness::{Fitness, Probe};
pub use grid::{CellIndex, GridParams, GridSpec, Topology};
pub use metrics::{aggregate, OfflineErrorAccumulator, RunStatistics};
pub use mpb::{Interval, Landscape, MpbParams, Peak};
pub use refiner::{Antibody, RefinerParams};
