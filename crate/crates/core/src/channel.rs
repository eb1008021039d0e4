//! Field-response multipath channel.
//!
//! The gain seen by sensor `k` at receive position `r` is a sum of plane waves
//!
//! ```text
//! h_k(r) = sum_l sqrt(mu_k) * sigma_kl * exp(-j 2pi/lambda * r . rho_kl)
//! rho_kl = [sin(theta_kl) cos(phi_kl), cos(theta_kl)]
//! ```
//!
//! The receive region is the square `[0, A] x [0, A]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::numerics::{sample_complex_gaussian, CVec};
use crate::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Cartesian antenna position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// One propagation path of a sensor's channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParam {
    /// Elevation angle, radians.
    pub elevation: f64,
    /// Azimuth angle, radians.
    pub azimuth: f64,
    /// Small-scale fading coefficient.
    pub gain: Complex64,
}

impl PathParam {
    /// Unit-bounded propagation vector `[sin(theta) cos(phi), cos(theta)]`.
    pub fn propagation_vector(&self) -> [f64; 2] {
        [
            self.elevation.sin() * self.azimuth.cos(),
            self.elevation.cos(),
        ]
    }
}

/// Multipath description of the channel from one sensor to the receive region.
#[derive(Debug, Clone)]
pub struct SensorChannel {
    paths: Vec<PathParam>,
    path_loss: f64,
    // per path: (rho_x, rho_y, sqrt(mu) * sigma)
    waves: Vec<(f64, f64, Complex64)>,
}

impl PartialEq for SensorChannel {
    fn eq(&self, other: &Self) -> bool {
        self.paths == other.paths && self.path_loss == other.path_loss
    }
}

impl SensorChannel {
    pub fn new(paths: Vec<PathParam>, path_loss: f64) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidInput("sensor channel needs at least one path".into()));
        }
        if !(path_loss.is_finite() && path_loss > 0.0) {
            return Err(Error::InvalidInput(format!("path loss must be positive, got {path_loss}")));
        }
        let amp = path_loss.sqrt();
        let waves = paths
            .iter()
            .map(|p| {
                let [rx, ry] = p.propagation_vector();
                (rx, ry, p.gain * amp)
            })
            .collect();
        Ok(Self {
            paths,
            path_loss,
            waves,
        })
    }

    pub fn paths(&self) -> &[PathParam] {
        &self.paths
    }

    /// Large-scale path loss as a linear power ratio.
    pub fn path_loss(&self) -> f64 {
        self.path_loss
    }

    /// Channel gain `h(r)` at one position.
    pub fn gain(&self, r: &Position, wavelength: f64) -> Complex64 {
        let k0 = 2.0 * PI / wavelength;
        self.waves
            .iter()
            .map(|&(rx, ry, coef)| {
                let (s, c) = (k0 * (r.x * rx + r.y * ry)).sin_cos();
                coef * Complex64::new(c, -s)
            })
            .sum()
    }

    /// Gain and spatial gradient `[dh/dx, dh/dy]` at one position.
    pub fn gain_and_gradient(&self, r: &Position, wavelength: f64) -> (Complex64, [Complex64; 2]) {
        let k0 = 2.0 * PI / wavelength;
        let mut h = Complex64::new(0.0, 0.0);
        let mut grad = [Complex64::new(0.0, 0.0); 2];
        for &(rx, ry, coef) in &self.waves {
            let (s, c) = (k0 * (r.x * rx + r.y * ry)).sin_cos();
            let term = coef * Complex64::new(c, -s);
            h += term;
            // d/dr exp(-j k0 r.rho) = -j k0 rho exp(...)
            let dterm = term * Complex64::new(0.0, -k0);
            grad[0] += dterm * rx;
            grad[1] += dterm * ry;
        }
        (h, grad)
    }

    /// Spatial gradient `[dh/dx, dh/dy]` at one position.
    pub fn gradient(&self, r: &Position, wavelength: f64) -> [Complex64; 2] {
        self.gain_and_gradient(r, wavelength).1
    }

    /// Channel vector `[h(r_1), ..., h(r_N)]`.
    pub fn vector(&self, positions: &[Position], wavelength: f64) -> CVec {
        CVec::from_iterator(positions.len(), positions.iter().map(|r| self.gain(r, wavelength)))
    }
}

/// A full problem instance: channels, receive geometry, noise and budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub sensors: Vec<SensorChannel>,
    pub num_antennas: usize,
    /// Side length of the square receive region, meters.
    pub region_size: f64,
    pub wavelength: f64,
    /// Minimum inter-antenna distance, meters.
    pub min_spacing: f64,
    /// Receiver noise power, watts.
    pub noise_power: f64,
    /// Per-sensor transmit power budgets, watts.
    pub power_budgets: Vec<f64>,
}

impl Scenario {
    pub fn num_sensors(&self) -> usize {
        self.sensors.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.sensors.is_empty() {
            return bad("scenario needs at least one sensor".into());
        }
        if self.num_antennas == 0 {
            return bad("scenario needs at least one antenna".into());
        }
        if self.power_budgets.len() != self.sensors.len() {
            return bad(format!(
                "{} power budgets for {} sensors",
                self.power_budgets.len(),
                self.sensors.len()
            ));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.region_size) || !positive(self.wavelength) || !positive(self.noise_power) {
            return bad("region size, wavelength and noise power must be positive".into());
        }
        if !(self.min_spacing.is_finite() && self.min_spacing >= 0.0) {
            return bad(format!("min spacing must be nonnegative, got {}", self.min_spacing));
        }
        if !self.power_budgets.iter().all(|&p| positive(p)) {
            return bad("power budgets must be positive".into());
        }
        for s in &self.sensors {
            if s.paths().is_empty() || !positive(s.path_loss()) {
                return bad("each sensor needs paths and a positive path loss".into());
            }
        }
        Ok(())
    }

    /// Channel vectors of all sensors at the given positions.
    pub fn channel_vectors(&self, positions: &[Position]) -> Vec<CVec> {
        self.sensors
            .iter()
            .map(|s| s.vector(positions, self.wavelength))
            .collect()
    }

    pub fn contains(&self, r: &Position) -> bool {
        (0.0..=self.region_size).contains(&r.x) && (0.0..=self.region_size).contains(&r.y)
    }
}

/// Parameters of one random scenario, in the units they are usually quoted in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams {
    pub num_sensors: usize,
    pub num_antennas: usize,
    pub num_paths: usize,
    pub path_loss_db: f64,
    pub noise_dbm: f64,
    pub power_dbm: f64,
    pub region_over_lambda: f64,
    pub wavelength: f64,
    pub min_spacing_over_lambda: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            num_sensors: 4,
            num_antennas: 4,
            num_paths: 4,
            path_loss_db: -100.0,
            noise_dbm: -100.0,
            power_dbm: 15.0,
            region_over_lambda: 4.0,
            wavelength: 0.1,
            min_spacing_over_lambda: 0.5,
        }
    }
}

/// Draws a scenario: per sensor, `num_paths` paths with elevation and azimuth
/// uniform on `[0, pi]` and fading `CN(0, 1/num_paths)`.
///
/// Only the path draws consume randomness, and they are made sensor by sensor
/// and path by path, so two parameter sets that differ only in power, region
/// or antenna count see identical channels from the same stream.
pub fn generate_scenario<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> Result<Scenario> {
    if params.num_paths == 0 {
        return Err(Error::config("num_paths", "must be at least 1"));
    }
    let path_loss = db_to_linear(params.path_loss_db);
    let fading_var = 1.0 / params.num_paths as f64;
    let mut sensors = Vec::with_capacity(params.num_sensors);
    for _ in 0..params.num_sensors {
        let mut paths = Vec::with_capacity(params.num_paths);
        for _ in 0..params.num_paths {
            let elevation = rng.random_range(0.0..=PI);
            let azimuth = rng.random_range(0.0..=PI);
            let gain = sample_complex_gaussian(rng, fading_var)?;
            paths.push(PathParam {
                elevation,
                azimuth,
                gain,
            });
        }
        sensors.push(SensorChannel::new(paths, path_loss)?);
    }
    let scenario = Scenario {
        sensors,
        num_antennas: params.num_antennas,
        region_size: params.region_over_lambda * params.wavelength,
        wavelength: params.wavelength,
        min_spacing: params.min_spacing_over_lambda * params.wavelength,
        noise_power: dbm_to_watts(params.noise_dbm),
        power_budgets: vec![dbm_to_watts(params.power_dbm); params.num_sensors],
    };
    scenario
        .validate()
        .map_err(|e| Error::config("scenario", e.to_string()))?;
    Ok(scenario)
}

/// Uniform linear array along the x axis starting at the origin.
pub fn ula_positions(count: usize, spacing: f64) -> Vec<Position> {
    (0..count)
        .map(|n| Position::new(n as f64 * spacing, 0.0))
        .collect()
}
