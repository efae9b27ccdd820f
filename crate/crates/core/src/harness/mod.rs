//! Monte Carlo evaluation: configuration, seeding, sweeps and export.

pub mod config;
pub mod export;
pub mod seed;
pub mod sweep;

pub use config::{OutputConfig, SweepConfig};
pub use export::{export, ExportPaths, RunMetadata};
pub use sweep::{run_sweep, run_sweep_with_threads, run_trial, run_trial_detailed, SweepResult, SweepRow, TrialOutcome};
