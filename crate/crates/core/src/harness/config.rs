//! Experiment configuration, read from TOML.
//!
//! ```toml
//! num_sensors = 4
//! power_dbm = [0, 5, 10, 15, 20, 25, 30]
//! region_over_lambda = 4
//! trials = 100
//! scheme = "both"
//!
//! [optimizer]
//! multistarts = 1
//! ```
//!
//! Every key is optional. At most one of `power_dbm`, `region_over_lambda`
//! and `num_antennas` may be a list; that key becomes the sweep axis.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ScenarioParams;
use crate::optimizer::OptimizerConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Movable antennas.
    Ma,
    /// Fixed half-wavelength uniform linear array.
    Fpa,
    Both,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Ma => "ma",
            Scheme::Fpa => "fpa",
            Scheme::Both => "both",
        }
    }
}

/// A scalar setting or a list of values to sweep over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Copy> Sweep<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            Sweep::One(v) => vec![*v],
            Sweep::Many(v) => v.clone(),
        }
    }

    pub fn is_list(&self) -> bool {
        matches!(self, Sweep::Many(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub num_sensors: usize,
    pub num_antennas: Sweep<usize>,
    pub num_paths: usize,
    pub path_loss_db: f64,
    pub noise_dbm: f64,
    pub power_dbm: Sweep<f64>,
    pub region_over_lambda: Sweep<f64>,
    /// Carrier wavelength, meters.
    pub wavelength: f64,
    pub min_spacing_over_lambda: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub scheme: Scheme,
    pub optimizer: OptimizerConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let p = ScenarioParams::default();
        Self {
            num_sensors: p.num_sensors,
            num_antennas: Sweep::One(p.num_antennas),
            num_paths: p.num_paths,
            path_loss_db: p.path_loss_db,
            noise_dbm: p.noise_dbm,
            power_dbm: Sweep::One(p.power_dbm),
            region_over_lambda: Sweep::One(p.region_over_lambda),
            wavelength: p.wavelength,
            min_spacing_over_lambda: p.min_spacing_over_lambda,
            trials: 100,
            master_seed: 1,
            scheme: Scheme::Both,
            optimizer: OptimizerConfig::default(),
        }
    }
}

fn check_sweep(key: &str, values: &[f64], valid: impl Fn(f64) -> bool, what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::config(key, "sweep list must not be empty"));
    }
    if let Some(v) = values.iter().find(|v| !valid(**v)) {
        return Err(Error::config(key, format!("{v} is invalid: {what}")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(key, "sweep list must be strictly increasing"));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.num_sensors == 0 {
            return Err(Error::config("num_sensors", "must be at least 1"));
        }
        if self.num_paths == 0 {
            return Err(Error::config("num_paths", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if !finite(self.path_loss_db) {
            return Err(Error::config("path_loss_db", "must be finite"));
        }
        if !finite(self.noise_dbm) {
            return Err(Error::config("noise_dbm", "must be finite"));
        }
        if !positive(self.wavelength) {
            return Err(Error::config("wavelength", "must be positive"));
        }
        if !(self.min_spacing_over_lambda >= 0.0 && self.min_spacing_over_lambda.is_finite()) {
            return Err(Error::config("min_spacing_over_lambda", "must be nonnegative"));
        }
        let antennas: Vec<f64> = self.num_antennas.values().iter().map(|&n| n as f64).collect();
        check_sweep("num_antennas", &antennas, |v| v >= 1.0, "need at least one antenna")?;
        check_sweep("power_dbm", &self.power_dbm.values(), finite, "must be finite")?;
        check_sweep("region_over_lambda", &self.region_over_lambda.values(), positive, "must be positive")?;
        let lists: Vec<&str> = [
            ("power_dbm", self.power_dbm.is_list()),
            ("region_over_lambda", self.region_over_lambda.is_list()),
            ("num_antennas", self.num_antennas.is_list()),
        ]
        .iter()
        .filter(|(_, l)| *l)
        .map(|(k, _)| *k)
        .collect();
        if lists.len() > 1 {
            return Err(Error::config(lists[1], format!("only one key may be a sweep list, also got {}", lists[0])));
        }
        self.optimizer.validate()
    }

    /// Name of the swept key; `power_dbm` when nothing is a list.
    pub fn sweep_name(&self) -> &'static str {
        if self.region_over_lambda.is_list() {
            "region_over_lambda"
        } else if self.num_antennas.is_list() {
            "num_antennas"
        } else {
            "power_dbm"
        }
    }

    /// Scenario parameters for each sweep value, in sweep order.
    pub fn sweep_points(&self) -> Vec<(f64, ScenarioParams)> {
        let base = ScenarioParams {
            num_sensors: self.num_sensors,
            num_antennas: self.num_antennas.values()[0],
            num_paths: self.num_paths,
            path_loss_db: self.path_loss_db,
            noise_dbm: self.noise_dbm,
            power_dbm: self.power_dbm.values()[0],
            region_over_lambda: self.region_over_lambda.values()[0],
            wavelength: self.wavelength,
            min_spacing_over_lambda: self.min_spacing_over_lambda,
        };
        match self.sweep_name() {
            "region_over_lambda" => self
                .region_over_lambda
                .values()
                .into_iter()
                .map(|a| (a, ScenarioParams { region_over_lambda: a, ..base }))
                .collect(),
            "num_antennas" => self
                .num_antennas
                .values()
                .into_iter()
                .map(|n| (n as f64, ScenarioParams { num_antennas: n, ..base }))
                .collect(),
            _ => self
                .power_dbm
                .values()
                .into_iter()
                .map(|p| (p, ScenarioParams { power_dbm: p, ..base }))
                .collect(),
        }
    }
}

/// Key on the line where a TOML error was reported.
fn key_at(src: &str, offset: usize) -> String {
    let start = src[..offset.min(src.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = src[start..].lines().next().unwrap_or("").trim();
    if let Some((key, _)) = line.split_once('=') {
        key.trim().to_string()
    } else if line.starts_with('[') {
        line.trim_matches(|c| c == '[' || c == ']').trim().to_string()
    } else if line.is_empty() {
        "config".to_string()
    } else {
        line.to_string()
    }
}

pub fn parse_config_str(src: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(src).map_err(|e| {
        let key = e.span().map_or_else(|| "config".to_string(), |s| key_at(src, s.start));
        Error::config(key, e.message().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and validates a config file. Unspecified keys take their defaults.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&src)
}
