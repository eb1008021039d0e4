//! Alternating minimization of the computation MSE.
//!
//! One outer iteration updates the combiner, then each sensor's power-control
//! factor, then each antenna position, holding all other blocks fixed. The
//! combiner and power blocks are solved exactly. Position blocks run a
//! projected gradient ascent on the antenna's objective `f_n` with Armijo
//! backtracking; a step that leaves a candidate closer than the minimum
//! spacing to another antenna counts as a failed step and is shrunk.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ula_positions, Position, Scenario};
use crate::numerics::{hermitian_solve, CMat, CVec};
use crate::objective::{mse_with_channels, position_coeffs, Solution};
use crate::{Error, Result};

/// Slack applied to the minimum-spacing constraint.
pub const SPACING_SLACK: f64 = 1e-12;

const RANDOM_PLACEMENT_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Centered square lattice.
    Grid,
    /// Uniform points drawn by rejection sampling.
    Random,
    /// Half-wavelength line along the bottom edge of the region.
    UlaClipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub outer_max_iters: usize,
    /// Stop once one outer iteration improves the MSE by less than this
    /// fraction.
    pub outer_rel_tol: f64,
    pub inner_max_iters: usize,
    pub armijo_c: f64,
    pub step_shrink: f64,
    /// First trial step of each ascent iteration, in wavelengths.
    pub init_step_over_lambda: f64,
    pub init_mode: InitMode,
    /// Independent starts; the first uses `init_mode`, the rest are random.
    pub multistarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            outer_max_iters: 200,
            outer_rel_tol: 1e-6,
            inner_max_iters: 100,
            armijo_c: 1e-4,
            step_shrink: 0.5,
            init_step_over_lambda: 0.25,
            init_mode: InitMode::Grid,
            multistarts: 1,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let key = |k: &str| format!("optimizer.{k}");
        if self.outer_max_iters == 0 {
            return Err(Error::config(key("outer_max_iters"), "must be at least 1"));
        }
        if !(self.outer_rel_tol.is_finite() && self.outer_rel_tol > 0.0) {
            return Err(Error::config(key("outer_rel_tol"), "must be positive"));
        }
        if self.inner_max_iters == 0 {
            return Err(Error::config(key("inner_max_iters"), "must be at least 1"));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::config(key("armijo_c"), "must lie in (0, 1)"));
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return Err(Error::config(key("step_shrink"), "must lie in (0, 1)"));
        }
        if !(self.init_step_over_lambda.is_finite() && self.init_step_over_lambda > 0.0) {
            return Err(Error::config(key("init_step_over_lambda"), "must be positive"));
        }
        if self.multistarts == 0 {
            return Err(Error::config(key("multistarts"), "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeReport {
    /// MSE of the initial point followed by the MSE after each outer iteration.
    pub mse_trace: Vec<f64>,
    pub solution: Solution,
    pub iterations: usize,
    pub converged: bool,
    /// Largest MSE increase observed across single block updates.
    pub max_block_increase: f64,
}

impl OptimizeReport {
    pub fn final_mse(&self) -> f64 {
        *self.mse_trace.last().expect("trace holds the initial MSE")
    }
}

fn combiner_from_channels(scenario: &Scenario, channels: &[CVec], powers: &[Complex64]) -> Result<CVec> {
    let n = channels.first().map_or(0, |h| h.len());
    let mut a = CMat::identity(n, n) * Complex64::new(scenario.noise_power, 0.0);
    let mut b = CVec::zeros(n);
    for (h, w) in channels.iter().zip(powers) {
        a += h * h.adjoint() * Complex64::new(w.norm_sqr(), 0.0);
        b += h * *w;
    }
    hermitian_solve(&a, &b)
}

/// MMSE combiner `(sum_k |w_k|^2 h_k h_k^H + sigma^2 I)^-1 sum_k w_k h_k`.
pub fn update_combiner(scenario: &Scenario, sol: &Solution) -> Result<CVec> {
    if sol.powers.len() != scenario.num_sensors() {
        return Err(Error::InvalidInput("one power factor per sensor required".into()));
    }
    let channels = scenario.channel_vectors(&sol.positions);
    combiner_from_channels(scenario, &channels, &sol.powers)
}

/// Minimizer of `|g w - 1|^2` over the disk `|w|^2 <= budget`, where `g` is
/// the effective gain `u^H h_k`.
///
/// If the unconstrained solution `1/g` fits the budget it is returned;
/// otherwise the boundary point `sqrt(budget) conj(g)/|g|`. A zero gain makes
/// the objective constant and yields `0`.
pub fn optimal_power(gain: Complex64, budget: f64) -> Complex64 {
    let g2 = gain.norm_sqr();
    if g2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let multiplier = if g2 * budget >= 1.0 {
        0.0
    } else {
        gain.norm() / budget.sqrt() - g2
    };
    gain.conj() / (multiplier + g2)
}

/// Optimal power-control factor of sensor `k` (zero-based).
pub fn update_power(scenario: &Scenario, sol: &Solution, k: usize) -> Result<Complex64> {
    let sensor = scenario
        .sensors
        .get(k)
        .ok_or_else(|| Error::InvalidInput(format!("sensor index {k} out of range")))?;
    if sol.combiner.len() != sol.positions.len() {
        return Err(Error::InvalidInput("combiner length must equal antenna count".into()));
    }
    let h = sensor.vector(&sol.positions, scenario.wavelength);
    Ok(optimal_power(sol.combiner.dotc(&h), scenario.power_budgets[k]))
}

/// True iff every position lies in the region and all pairs are at least the
/// minimum spacing apart.
pub fn check_feasible(scenario: &Scenario, positions: &[Position]) -> bool {
    positions.iter().all(|r| r.is_finite() && scenario.contains(r))
        && positions.iter().enumerate().all(|(i, a)| {
            positions[i + 1..]
                .iter()
                .all(|b| a.distance(b) >= scenario.min_spacing - SPACING_SLACK)
        })
}

fn spaced_from_others(scenario: &Scenario, positions: &[Position], n: usize, r: &Position) -> bool {
    positions
        .iter()
        .enumerate()
        .all(|(m, p)| m == n || r.distance(p) >= scenario.min_spacing - SPACING_SLACK)
}

/// Projected gradient ascent on antenna `n`'s objective. Returns a feasible
/// position whose objective is no lower than at the current one.
pub fn update_position(scenario: &Scenario, sol: &Solution, n: usize, cfg: &OptimizerConfig) -> Result<Position> {
    if !check_feasible(scenario, &sol.positions) {
        return Err(Error::Infeasible(
            "position update requires a feasible starting layout".into(),
        ));
    }
    let coeffs = position_coeffs(scenario, sol, n)?;
    let lambda = scenario.wavelength;
    let min_step = 1e-9 * lambda;
    let a = scenario.region_size;

    let max_step = cfg.init_step_over_lambda * lambda;
    let mut first_step = max_step;
    let mut r = sol.positions[n];
    let mut f = coeffs.objective(scenario, &r);
    for _ in 0..cfg.inner_max_iters {
        let g = coeffs.gradient(scenario, &r);
        let g_norm = g[0].hypot(g[1]);
        if g_norm.is_nan() || g_norm < 1e-9 {
            break;
        }
        let dir = [g[0] / g_norm, g[1] / g_norm];
        let mut step = first_step;
        let mut accepted = None;
        while step >= min_step {
            let cand = Position::new(
                (r.x + step * dir[0]).clamp(0.0, a),
                (r.y + step * dir[1]).clamp(0.0, a),
            );
            let moved = [cand.x - r.x, cand.y - r.y];
            let slope = g[0] * moved[0] + g[1] * moved[1];
            if slope > 0.0 && spaced_from_others(scenario, &sol.positions, n, &cand) {
                let f_cand = coeffs.objective(scenario, &cand);
                if f_cand >= f + cfg.armijo_c * slope {
                    accepted = Some((cand, f_cand));
                    // next iteration starts one expansion above the accepted step
                    first_step = (step / cfg.step_shrink).min(max_step);
                    break;
                }
            }
            step *= cfg.step_shrink;
        }
        match accepted {
            Some((cand, f_cand)) => {
                r = cand;
                f = f_cand;
            }
            None => break,
        }
    }
    Ok(r)
}

fn placement_error(scenario: &Scenario) -> Error {
    Error::PlacementInfeasible {
        count: scenario.num_antennas,
        spacing: scenario.min_spacing,
        size: scenario.region_size,
    }
}

fn grid_positions(scenario: &Scenario) -> Vec<Position> {
    let count = scenario.num_antennas;
    let a = scenario.region_size;
    let side = (count as f64).sqrt().ceil() as usize;
    let pitch = scenario.min_spacing.max(a / side as f64);
    let offset = ((a - (side - 1) as f64 * pitch) / 2.0).max(0.0);
    (0..count)
        .map(|i| {
            let (row, col) = (i / side, i % side);
            Position::new(
                (offset + col as f64 * pitch).clamp(0.0, a),
                (offset + row as f64 * pitch).clamp(0.0, a),
            )
        })
        .collect()
}

fn random_positions<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<Vec<Position>> {
    let a = scenario.region_size;
    let mut placed: Vec<Position> = Vec::with_capacity(scenario.num_antennas);
    for _ in 0..RANDOM_PLACEMENT_ATTEMPTS {
        if placed.len() == scenario.num_antennas {
            break;
        }
        let cand = Position::new(rng.random_range(0.0..=a), rng.random_range(0.0..=a));
        if placed
            .iter()
            .all(|p| p.distance(&cand) >= scenario.min_spacing - SPACING_SLACK)
        {
            placed.push(cand);
        }
    }
    if placed.len() < scenario.num_antennas {
        return Err(placement_error(scenario));
    }
    Ok(placed)
}

fn initial_layout<R: Rng + ?Sized>(scenario: &Scenario, mode: InitMode, rng: &mut R) -> Result<Vec<Position>> {
    let positions = match mode {
        InitMode::Grid => grid_positions(scenario),
        InitMode::Random => random_positions(scenario, rng)?,
        InitMode::UlaClipped => {
            let spacing = scenario.wavelength / 2.0;
            if (scenario.num_antennas - 1) as f64 * spacing > scenario.region_size {
                return Err(placement_error(scenario));
            }
            ula_positions(scenario.num_antennas, spacing)
        }
    };
    if !check_feasible(scenario, &positions) {
        return Err(placement_error(scenario));
    }
    Ok(positions)
}

/// Feasible starting layout for the configured initialization mode.
pub fn init_positions<R: Rng + ?Sized>(scenario: &Scenario, cfg: &OptimizerConfig, rng: &mut R) -> Result<Vec<Position>> {
    initial_layout(scenario, cfg.init_mode, rng)
}

fn run_blocks(
    scenario: &Scenario,
    positions: Vec<Position>,
    cfg: &OptimizerConfig,
    move_antennas: bool,
) -> Result<OptimizeReport> {
    let n_ant = positions.len();
    let mut sol = Solution {
        powers: scenario
            .power_budgets
            .iter()
            .map(|p| Complex64::new(p.sqrt(), 0.0))
            .collect(),
        combiner: CVec::zeros(n_ant),
        positions,
    };
    let mut channels = scenario.channel_vectors(&sol.positions);
    let mse = |sol: &Solution, channels: &[CVec]| {
        mse_with_channels(channels, &sol.powers, &sol.combiner, scenario.noise_power)
    };

    let mut current = mse(&sol, &channels);
    let mut trace = vec![current];
    let mut max_increase: f64 = 0.0;
    let mut track = |before: &mut f64, after: f64| {
        max_increase = max_increase.max(after - *before);
        *before = after;
    };
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.outer_max_iters {
        iterations += 1;
        let start = current;

        sol.combiner = combiner_from_channels(scenario, &channels, &sol.powers)?;
        track(&mut current, mse(&sol, &channels));

        for k in 0..scenario.num_sensors() {
            let gain = sol.combiner.dotc(&channels[k]);
            sol.powers[k] = optimal_power(gain, scenario.power_budgets[k]);
            track(&mut current, mse(&sol, &channels));
        }

        if move_antennas {
            for n in 0..n_ant {
                let r = update_position(scenario, &sol, n, cfg)?;
                if r != sol.positions[n] {
                    sol.positions[n] = r;
                    for (h, ch) in channels.iter_mut().zip(&scenario.sensors) {
                        h[n] = ch.gain(&r, scenario.wavelength);
                    }
                }
                track(&mut current, mse(&sol, &channels));
            }
        }

        trace.push(current);
        if start - current <= cfg.outer_rel_tol * start {
            converged = true;
            break;
        }
    }

    Ok(OptimizeReport {
        mse_trace: trace,
        solution: sol,
        iterations,
        converged,
        max_block_increase: max_increase,
    })
}

/// Alternates the combiner and power blocks with antennas held at `positions`
/// (the fixed-array baseline).
pub fn minimize_fixed_positions(
    scenario: &Scenario,
    positions: Vec<Position>,
    cfg: &OptimizerConfig,
) -> Result<OptimizeReport> {
    scenario.validate()?;
    cfg.validate()?;
    if positions.is_empty() {
        return Err(Error::InvalidInput("at least one antenna position required".into()));
    }
    run_blocks(scenario, positions, cfg, false)
}

/// Full alternating minimization over combiner, powers and antenna positions.
/// With several starts, the run with the lowest final MSE is returned.
pub fn alternating_minimize<R: Rng + ?Sized>(
    scenario: &Scenario,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<OptimizeReport> {
    scenario.validate()?;
    cfg.validate()?;
    let mut best: Option<OptimizeReport> = None;
    for start in 0..cfg.multistarts {
        let mode = if start == 0 { cfg.init_mode } else { InitMode::Random };
        let positions = initial_layout(scenario, mode, rng)?;
        let report = run_blocks(scenario, positions, cfg, true)?;
        if best.as_ref().is_none_or(|b| report.final_mse() < b.final_mse()) {
            best = Some(report);
        }
    }
    Ok(best.expect("at least one start"))
}
