//! Experiment harness for the `gpucb` library: TOML configs, tabular
//! datasets, parallel seed sweeps and CSV outputs.

pub mod config;
pub mod error;
pub mod sweep;
pub mod table;
pub mod trace;

pub use config::{load_config, parse_config, ExperimentConfig};
pub use error::{BenchError, ConfigError, IngestError};
pub use sweep::{execute, run_sweep, SweepReport};
