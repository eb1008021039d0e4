//! Monte Carlo experiments comparing movable antennas with a fixed array.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{parse_config, parse_config_str, ExperimentConfig, Scheme, Sweep};
pub use experiment::{
    power_margin_db, run_experiment, run_experiment_with_trials, SweepResult, TrialRecord,
};
pub use output::{read_json, to_csv, write_results, write_trials, OutputFormat};
