//! Experiment driver for reduced-basis eigenvalue approximation: config
//! presets, FOM/offline/sweep/bound stages and their CSV output.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use config::{ConfigError, ExperimentConfig, Overrides, Preset, Sampling};
pub use error::CliError;
pub use experiment::{Experiment, Offline, Sweep, SweepEntry, SweepPoint};
pub use output::{basis_for, run_bounds, run_fom, run_offline, run_sweep};
