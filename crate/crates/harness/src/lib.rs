//! Experiment harness for `cpsoc-core`: TOML configuration, the `{f} x {m}` sweep over
//! seeded runs, and CSV / plot-series output.

pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

pub use config::{ExperimentConfig, Sweep};
pub use error::HarnessError;
pub use output::{read_csv, sig6, write_csv, write_csv_file, write_plot_series};
pub use sweep::{run_grid, run_point, ResultRow};
