//! Seeded experiment runner for `tdrl-core`: TOML configs, a name registry,
//! replicate-parallel runs with byte-stable CSV output, hyperparameter sweeps
//! and long-format plot data.

pub mod config;
pub mod error;
pub mod formats;
pub mod plot;
pub mod registry;
pub mod run;
pub mod sweep;

pub use config::{AlgorithmConfig, EnvConfig, ExperimentConfig, RunConfig};
pub use error::{HarnessError, Result};
pub use plot::{emit_plotdata, parse_plotdata, plot_rows, PlotRow, METRICS};
pub use run::{run_experiment, ExperimentOutput, RunRecord, SummaryRow};
pub use sweep::{parse_grid, sweep, GridAxis, SweepResult, SweepRow};
