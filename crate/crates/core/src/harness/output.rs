//! CSV and JSON writers for sweep results.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::{SweepResult, TrialRecord};
use crate::{Error, Result};

pub const CSV_HEADER: &str =
    "sweep_name,sweep_value,scheme,mean_mse,median_mse,std_mse,mean_mse_per_k,trials,mean_outer_iters";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Nine significant digits in scientific notation.
fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn to_csv(results: &[SweepResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.sweep_name,
            sig9(r.sweep_value),
            r.scheme.as_str(),
            sig9(r.mean_mse),
            sig9(r.median_mse),
            sig9(r.std_mse),
            sig9(r.mean_mse_per_k),
            r.trials,
            sig9(r.mean_outer_iters),
        );
    }
    out
}

pub fn to_json(results: &[SweepResult]) -> Result<String> {
    serde_json::to_string_pretty(results).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn write_results(results: &[SweepResult], out_path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    if results.is_empty() {
        return Err(Error::InvalidInput("no results to write".into()));
    }
    let text = match format {
        OutputFormat::Csv => to_csv(results),
        OutputFormat::Json => to_json(results)?,
    };
    std::fs::write(out_path, text)?;
    Ok(())
}

pub fn read_json(path: impl AsRef<Path>) -> Result<Vec<SweepResult>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Per-trial dump as a JSON array.
pub fn write_trials(records: &[TrialRecord], out_path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string(records).map_err(|e| Error::InvalidInput(e.to_string()))?;
    std::fs::write(out_path, text)?;
    Ok(())
}
