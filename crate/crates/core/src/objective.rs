//! Computation MSE and the per-antenna position objective.
//!
//! With every block but antenna `n`'s position fixed, the MSE equals
//! `const - f_n(r_n)` where
//!
//! ```text
//! f_n(r) = sum_k 2 Re{conj(h_k(r)) c_kn} - d_kn |h_k(r)|^2
//! c_kn   = u_n conj(w_k) - |w_k|^2 sum_{n' != n} u_n conj(u_n') h_k(r_n')
//! d_kn   = |w_k u_n|^2
//! ```
//!
//! so maximizing `f_n` over `r` is the same as minimizing the MSE.

use num_complex::Complex64;

use crate::channel::{Position, Scenario};
use crate::numerics::CVec;
use crate::{Error, Result};

/// Decision variables of the MSE minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub positions: Vec<Position>,
    /// Power-control factor `w_k` of each sensor.
    pub powers: Vec<Complex64>,
    /// Receive combiner `u`.
    pub combiner: CVec,
}

impl Solution {
    fn check_dims(&self, scenario: &Scenario) -> Result<()> {
        let n = self.positions.len();
        if n == 0 || self.combiner.len() != n || self.powers.len() != scenario.num_sensors() {
            return Err(Error::InvalidInput(format!(
                "solution has {} positions, combiner length {}, {} powers for {} sensors",
                n,
                self.combiner.len(),
                self.powers.len(),
                scenario.num_sensors()
            )));
        }
        Ok(())
    }
}

/// `sum_k |u^H h_k w_k - 1|^2 + sigma^2 ||u||^2` from precomputed channels.
pub(crate) fn mse_with_channels(
    channels: &[CVec],
    powers: &[Complex64],
    combiner: &CVec,
    noise_power: f64,
) -> f64 {
    let misalignment: f64 = channels
        .iter()
        .zip(powers)
        .map(|(h, w)| (combiner.dotc(h) * w - 1.0).norm_sqr())
        .sum();
    let energy: f64 = combiner.iter().map(|z| z.norm_sqr()).sum();
    misalignment + noise_power * energy
}

/// Computation MSE `E|x - x_hat|^2` of a solution.
pub fn compute_mse(scenario: &Scenario, sol: &Solution) -> Result<f64> {
    sol.check_dims(scenario)?;
    let channels = scenario.channel_vectors(&sol.positions);
    Ok(mse_with_channels(&channels, &sol.powers, &sol.combiner, scenario.noise_power))
}

/// Coefficients of antenna `n`'s position objective. They depend on every
/// variable except `r_n`, so one set serves any number of candidate positions.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionCoeffs {
    pub c: Vec<Complex64>,
    pub d: Vec<f64>,
}

impl PositionCoeffs {
    /// `f_n(r)`.
    pub fn objective(&self, scenario: &Scenario, r: &Position) -> f64 {
        scenario
            .sensors
            .iter()
            .zip(self.c.iter().zip(&self.d))
            .map(|(ch, (c, d))| {
                let h = ch.gain(r, scenario.wavelength);
                2.0 * (h.conj() * c).re - d * h.norm_sqr()
            })
            .sum()
    }

    /// `[df_n/dx, df_n/dy]` at `r`.
    pub fn gradient(&self, scenario: &Scenario, r: &Position) -> [f64; 2] {
        let mut grad = [0.0; 2];
        for (ch, (c, d)) in scenario.sensors.iter().zip(self.c.iter().zip(&self.d)) {
            let (h, dh) = ch.gain_and_gradient(r, scenario.wavelength);
            for (g, dhi) in grad.iter_mut().zip(dh) {
                *g += 2.0 * (c * dhi.conj()).re - 2.0 * d * (h.conj() * dhi).re;
            }
        }
        grad
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|c| *c == Complex64::new(0.0, 0.0)) && self.d.iter().all(|d| *d == 0.0)
    }
}

/// Coefficients `c_kn`, `d_kn` for antenna `n` (zero-based).
pub fn position_coeffs(scenario: &Scenario, sol: &Solution, n: usize) -> Result<PositionCoeffs> {
    sol.check_dims(scenario)?;
    if n >= sol.positions.len() {
        return Err(Error::InvalidInput(format!(
            "antenna index {n} out of range for {} antennas",
            sol.positions.len()
        )));
    }
    let u_n = sol.combiner[n];
    let mut c = Vec::with_capacity(scenario.num_sensors());
    let mut d = Vec::with_capacity(scenario.num_sensors());
    for (ch, w) in scenario.sensors.iter().zip(&sol.powers) {
        let others: Complex64 = sol
            .positions
            .iter()
            .zip(sol.combiner.iter())
            .enumerate()
            .filter(|(m, _)| *m != n)
            .map(|(_, (r, u))| u.conj() * ch.gain(r, scenario.wavelength))
            .sum();
        c.push(u_n * w.conj() - w.norm_sqr() * u_n * others);
        d.push((w * u_n).norm_sqr());
    }
    Ok(PositionCoeffs { c, d })
}

/// `f_n(r)` for antenna `n` at candidate `r`, other variables taken from `sol`.
pub fn position_objective(scenario: &Scenario, sol: &Solution, n: usize, r: &Position) -> Result<f64> {
    Ok(position_coeffs(scenario, sol, n)?.objective(scenario, r))
}

/// Gradient of [`position_objective`] with respect to the candidate position.
pub fn position_objective_gradient(
    scenario: &Scenario,
    sol: &Solution,
    n: usize,
    r: &Position,
) -> Result<[f64; 2]> {
    Ok(position_coeffs(scenario, sol, n)?.gradient(scenario, r))
}
