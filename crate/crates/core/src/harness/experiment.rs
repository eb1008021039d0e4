//! Paired Monte Carlo runs over a sweep axis.
//!
//! Trial `t` at every sweep point and for both schemes draws its scenario from
//! the stream `(master_seed, t)`, so the movable-antenna and fixed-array rows
//! are evaluated on identical channels. Trials run on the rayon pool; results
//! are reduced in trial order, so output does not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Scheme};
use crate::channel::{generate_scenario, ula_positions, Position, ScenarioParams};
use crate::numerics::{derive_trial_stream, SeedSpec};
use crate::optimizer::{alternating_minimize, minimize_fixed_positions, OptimizeReport};
use crate::{Error, Result};

/// Aggregate statistics of one scheme at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub sweep_name: String,
    pub sweep_value: f64,
    pub scheme: Scheme,
    #[serde(with = "nan_as_null")]
    pub mean_mse: f64,
    #[serde(with = "nan_as_null")]
    pub median_mse: f64,
    #[serde(with = "nan_as_null")]
    pub std_mse: f64,
    #[serde(with = "nan_as_null")]
    pub mean_mse_per_k: f64,
    pub trials: usize,
    #[serde(with = "nan_as_null")]
    pub mean_outer_iters: f64,
    /// Set when the point could not be run; statistics are then NaN.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Outcome of one trial, for the optional per-trial dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sweep_name: String,
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub trial_index: u64,
    pub mse: f64,
    pub outer_iters: usize,
    pub converged: bool,
    pub positions: Vec<Position>,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len().is_multiple_of(2) {
        0.5 * (s[m - 1] + s[m])
    } else {
        s[m]
    }
}

/// Sample standard deviation (zero for a single value).
pub(crate) fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

struct TrialOutcome {
    ma: Option<Result<OptimizeReport>>,
    fpa: Option<Result<OptimizeReport>>,
}

fn run_trial(cfg: &ExperimentConfig, params: &ScenarioParams, trial: u64) -> TrialOutcome {
    let seed = SeedSpec::new(cfg.master_seed, trial);
    let ma = matches!(cfg.scheme, Scheme::Ma | Scheme::Both).then(|| {
        let mut rng = derive_trial_stream(seed);
        let scenario = generate_scenario(params, &mut rng)?;
        alternating_minimize(&scenario, &cfg.optimizer, &mut rng)
    });
    let fpa = matches!(cfg.scheme, Scheme::Fpa | Scheme::Both).then(|| {
        let mut rng = derive_trial_stream(seed);
        let scenario = generate_scenario(params, &mut rng)?;
        let array = ula_positions(scenario.num_antennas, scenario.wavelength / 2.0);
        minimize_fixed_positions(&scenario, array, &cfg.optimizer)
    });
    TrialOutcome { ma, fpa }
}

fn summarize(
    name: &str,
    value: f64,
    scheme: Scheme,
    num_sensors: usize,
    reports: Vec<Result<OptimizeReport>>,
    records: &mut Vec<TrialRecord>,
) -> Result<SweepResult> {
    let mut ok = Vec::with_capacity(reports.len());
    for r in reports {
        match r {
            Ok(rep) => ok.push(rep),
            Err(e @ Error::PlacementInfeasible { .. }) => {
                return Ok(SweepResult {
                    sweep_name: name.to_string(),
                    sweep_value: value,
                    scheme,
                    mean_mse: f64::NAN,
                    median_mse: f64::NAN,
                    std_mse: f64::NAN,
                    mean_mse_per_k: f64::NAN,
                    trials: 0,
                    mean_outer_iters: f64::NAN,
                    error: Some(e.to_string()),
                });
            }
            Err(e) => return Err(e),
        }
    }
    let mses: Vec<f64> = ok.iter().map(|r| r.final_mse()).collect();
    let iters: Vec<f64> = ok.iter().map(|r| r.iterations as f64).collect();
    for (t, rep) in ok.into_iter().enumerate() {
        records.push(TrialRecord {
            sweep_name: name.to_string(),
            sweep_value: value,
            scheme,
            trial_index: t as u64,
            mse: rep.final_mse(),
            outer_iters: rep.iterations,
            converged: rep.converged,
            positions: rep.solution.positions,
        });
    }
    let mean_mse = mean(&mses);
    Ok(SweepResult {
        sweep_name: name.to_string(),
        sweep_value: value,
        scheme,
        mean_mse,
        median_mse: median(&mses),
        std_mse: std_dev(&mses),
        mean_mse_per_k: mean_mse / num_sensors as f64,
        trials: mses.len(),
        mean_outer_iters: mean(&iters),
        error: None,
    })
}

/// Runs every sweep point and returns summary rows plus one record per
/// completed trial.
///
/// Rows come in sweep order; with `scheme = both` the movable-antenna row
/// precedes the fixed-array row at each point. A point where the antennas
/// cannot be placed yields an error row and the remaining points still run.
pub fn run_experiment_with_trials(cfg: &ExperimentConfig) -> Result<(Vec<SweepResult>, Vec<TrialRecord>)> {
    cfg.validate()?;
    let name = cfg.sweep_name();
    let points = cfg.sweep_points();
    let trials = cfg.trials as u64;
    let work: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| (0..trials).map(move |t| (p, t)))
        .collect();
    let mut outcomes: Vec<TrialOutcome> = work
        .par_iter()
        .map(|&(p, t)| run_trial(cfg, &points[p].1, t))
        .collect();

    let mut results = Vec::new();
    let mut records = Vec::new();
    for (p, (value, _)) in points.iter().enumerate().rev() {
        let chunk = outcomes.split_off(p * cfg.trials);
        let (ma, fpa): (Vec<_>, Vec<_>) = chunk.into_iter().map(|o| (o.ma, o.fpa)).unzip();
        let mut rows = Vec::new();
        let mut recs = Vec::new();
        for (scheme, reports) in [(Scheme::Ma, ma), (Scheme::Fpa, fpa)] {
            let reports: Vec<_> = reports.into_iter().flatten().collect();
            if !reports.is_empty() {
                rows.push(summarize(name, *value, scheme, cfg.num_sensors, reports, &mut recs)?);
            }
        }
        results.push(rows);
        records.push(recs);
    }
    results.reverse();
    records.reverse();
    Ok((results.concat(), records.concat()))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SweepResult>> {
    Ok(run_experiment_with_trials(cfg)?.0)
}

/// Power at which a decreasing `(power_dbm, mse)` curve reaches `log10(mse) = level`,
/// by linear interpolation of `log10(mse)` against power.
fn power_at_level(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let (p0, l0) = (w[0].0, w[0].1.log10());
        let (p1, l1) = (w[1].0, w[1].1.log10());
        let (lo, hi) = (l0.min(l1), l0.max(l1));
        if level < lo || level > hi {
            return None;
        }
        if l1 == l0 {
            return Some(p0);
        }
        Some(p0 + (level - l0) / (l1 - l0) * (p1 - p0))
    })
}

/// Horizontal gap, in dB, between the fixed-array and movable-antenna MSE
/// curves, read at the midpoint (in log10 MSE) of the range both curves cover.
/// Positive when the movable antennas need less power for the same MSE.
pub fn power_margin_db(ma: &[(f64, f64)], fpa: &[(f64, f64)]) -> Option<f64> {
    let range = |c: &[(f64, f64)]| {
        c.iter().map(|p| p.1.log10()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
            (lo.min(l), hi.max(l))
        })
    };
    let (ma_lo, ma_hi) = range(ma);
    let (fpa_lo, fpa_hi) = range(fpa);
    let lo = ma_lo.max(fpa_lo);
    let hi = ma_hi.min(fpa_hi);
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return None;
    }
    let level = 0.5 * (lo + hi);
    Some(power_at_level(fpa, level)? - power_at_level(ma, level)?)
}
