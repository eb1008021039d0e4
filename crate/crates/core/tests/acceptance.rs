//! Acceptance suite. Runs every criterion in sequence (so wall-clock limits
//! are not distorted by other tests sharing the CPU) and prints one PASS/FAIL
//! line per criterion. Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use aircomp::channel::{generate_scenario, Position, Scenario, ScenarioParams};
use aircomp::harness::{self, ExperimentConfig, Scheme, Sweep, SweepResult};
use aircomp::numerics::{cnorm, derive_trial_stream, sample_complex_gaussian, CVec, SeedSpec, TrialStream};
use aircomp::objective::{compute_mse, position_coeffs, Solution};
use aircomp::optimizer::{alternating_minimize, optimal_power, update_combiner, OptimizerConfig};
use num_complex::Complex64;
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Default scenario, random feasible-by-construction layout, random powers
/// inside the budget and the matching MMSE combiner.
fn random_instance(seed: u64) -> (Scenario, Solution, TrialStream) {
    let mut rng = derive_trial_stream(SeedSpec::new(0xACCE, seed));
    let s = generate_scenario(&ScenarioParams::default(), &mut rng).unwrap();
    let positions = random_layout(&s, &mut rng);
    let powers = (0..s.num_sensors())
        .map(|_| {
            let p = s.power_budgets[0];
            Complex64::from_polar(p.sqrt() * rng.random_range(0.2..1.0), rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    let mut sol = Solution {
        combiner: CVec::zeros(positions.len()),
        positions,
        powers,
    };
    sol.combiner = update_combiner(&s, &sol).unwrap();
    (s, sol, rng)
}

fn random_layout(s: &Scenario, rng: &mut TrialStream) -> Vec<Position> {
    let mut placed: Vec<Position> = Vec::new();
    while placed.len() < s.num_antennas {
        let r = Position::new(rng.random_range(0.0..s.region_size), rng.random_range(0.0..s.region_size));
        if placed.iter().all(|p| p.distance(&r) >= s.min_spacing) {
            placed.push(r);
        }
    }
    placed
}

fn random_point(s: &Scenario, rng: &mut TrialStream) -> Position {
    Position::new(rng.random_range(0.0..s.region_size), rng.random_range(0.0..s.region_size))
}

fn surrogate_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let (s, sol, mut rng) = random_instance(seed);
        for n in 0..s.num_antennas {
            let coeffs = position_coeffs(&s, &sol, n).unwrap();
            let totals: Vec<f64> = (0..10)
                .map(|_| {
                    let r = random_point(&s, &mut rng);
                    let mut moved = sol.clone();
                    moved.positions[n] = r;
                    compute_mse(&s, &moved).unwrap() + coeffs.objective(&s, &r)
                })
                .collect();
            let hi = totals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = totals.iter().cloned().fold(f64::INFINITY, f64::min);
            worst = worst.max(hi - lo);
        }
    }
    outcome(worst < 1e-9, format!("max spread {worst:.3e} (< 1e-9)"))
}

fn block_optimality() -> Outcome {
    // combiner: central-difference gradient of the MSE in Re/Im of u at u*
    let mut worst_ratio: f64 = 0.0;
    for seed in 100..200 {
        let (s, sol, _) = random_instance(seed);
        let u_norm = cnorm(&sol.combiner);
        let step = 1e-6 * u_norm;
        let mut g2 = 0.0;
        for i in 0..sol.combiner.len() {
            for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                let mut plus = sol.clone();
                let mut minus = sol.clone();
                plus.combiner[i] += dir * step;
                minus.combiner[i] -= dir * step;
                let d = (compute_mse(&s, &plus).unwrap() - compute_mse(&s, &minus).unwrap()) / (2.0 * step);
                g2 += d * d;
            }
        }
        worst_ratio = worst_ratio.max(g2.sqrt() / (1e-6 * (1.0 + u_norm)));
    }

    // power: closed form vs a 400 x 400 polar grid over the feasible disk
    let mut rng = derive_trial_stream(SeedSpec::new(0xACCE, 1_000));
    let mut worst_gap = f64::NEG_INFINITY;
    for _ in 0..100 {
        let variance = rng.random_range(0.1..10.0);
        let gain = sample_complex_gaussian(&mut rng, variance).unwrap();
        let budget: f64 = rng.random_range(0.01..4.0);
        let w = optimal_power(gain, budget);
        let ours = (gain * w - 1.0).norm_sqr();
        let mut grid = f64::INFINITY;
        for i in 0..400 {
            let mag = budget.sqrt() * i as f64 / 399.0;
            for j in 0..400 {
                let cand = Complex64::from_polar(mag, 2.0 * PI * j as f64 / 400.0);
                grid = grid.min((gain * cand - 1.0).norm_sqr());
            }
        }
        if w.norm_sqr() > budget + 1e-12 {
            return outcome(false, format!("power budget violated: |w|^2 = {} > {budget}", w.norm_sqr()));
        }
        worst_gap = worst_gap.max(ours - grid);
    }
    outcome(
        worst_ratio < 1.0 && worst_gap <= 1e-4,
        format!(
            "combiner grad / tol max {worst_ratio:.3e} (< 1); power minus grid optimum max {worst_gap:.3e} (<= 1e-4)"
        ),
    )
}

fn rel_err(g: [f64; 2], fd: [f64; 2]) -> f64 {
    (g[0] - fd[0]).hypot(g[1] - fd[1]) / g[0].hypot(g[1])
}

fn gradient_checks() -> Outcome {
    let mut worst_channel: f64 = 0.0;
    let mut worst_objective: f64 = 0.0;
    for seed in 0..100 {
        let (s, sol, mut rng) = random_instance(300 + seed);
        let step = 1e-6 * s.wavelength;
        let r = random_point(&s, &mut rng);
        let px = Position::new(r.x + step, r.y);
        let mx = Position::new(r.x - step, r.y);
        let py = Position::new(r.x, r.y + step);
        let my = Position::new(r.x, r.y - step);

        let ch = &s.sensors[seed as usize % s.num_sensors()];
        let g = ch.gradient(&r, s.wavelength);
        let fd_x = (ch.gain(&px, s.wavelength) - ch.gain(&mx, s.wavelength)) / (2.0 * step);
        let fd_y = (ch.gain(&py, s.wavelength) - ch.gain(&my, s.wavelength)) / (2.0 * step);
        let err = ((g[0] - fd_x).norm_sqr() + (g[1] - fd_y).norm_sqr()).sqrt()
            / (g[0].norm_sqr() + g[1].norm_sqr()).sqrt();
        worst_channel = worst_channel.max(err);

        let coeffs = position_coeffs(&s, &sol, seed as usize % s.num_antennas).unwrap();
        let f = |p: &Position| coeffs.objective(&s, p);
        let fd = [(f(&px) - f(&mx)) / (2.0 * step), (f(&py) - f(&my)) / (2.0 * step)];
        worst_objective = worst_objective.max(rel_err(coeffs.gradient(&s, &r), fd));
    }
    outcome(
        worst_channel < 1e-5 && worst_objective < 1e-5,
        format!("max rel err channel {worst_channel:.3e}, objective {worst_objective:.3e} (< 1e-5)"),
    )
}

fn monotone_convergence() -> Outcome {
    let cfg = OptimizerConfig::default();
    let mut max_rise: f64 = 0.0;
    let mut max_iters = 0;
    for trial in 0..100 {
        let mut rng = derive_trial_stream(SeedSpec::new(1, trial));
        let s = generate_scenario(&ScenarioParams::default(), &mut rng).unwrap();
        let rep = alternating_minimize(&s, &cfg, &mut rng).unwrap();
        let rise = rep.mse_trace.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        max_rise = max_rise.max(rise).max(rep.max_block_increase);
        max_iters = max_iters.max(rep.iterations);
    }
    outcome(
        max_rise <= 1e-10 && max_iters <= 200,
        format!("max MSE increase {max_rise:.3e} (<= 1e-10), max outer iterations {max_iters} (<= 200)"),
    )
}

fn curve(rows: &[SweepResult], scheme: Scheme) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.scheme == scheme)
        .map(|r| (r.sweep_value, r.mean_mse))
        .collect()
}

fn power_sweep_config() -> ExperimentConfig {
    ExperimentConfig {
        power_dbm: Sweep::Many(vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]),
        num_antennas: Sweep::One(4),
        trials: 100,
        scheme: Scheme::Both,
        ..Default::default()
    }
}

fn power_sweep(csv_out: &mut String) -> Outcome {
    let rows = harness::run_experiment(&power_sweep_config()).unwrap();
    *csv_out = harness::to_csv(&rows);
    let ma = curve(&rows, Scheme::Ma);
    let fpa = curve(&rows, Scheme::Fpa);
    let ordered = ma.len() == 7 && ma.iter().zip(&fpa).all(|(m, f)| m.1 < f.1);
    let margin = harness::power_margin_db(&ma, &fpa);
    let decreasing = |c: &[(f64, f64)]| c.windows(2).all(|w| w[1].1 < w[0].1);
    let table: Vec<String> = ma
        .iter()
        .zip(&fpa)
        .map(|(m, f)| format!("{}dBm {:.4e}/{:.4e}", m.0, m.1, f.1))
        .collect();
    println!("    ma/fpa mean MSE: {}", table.join(", "));
    println!(
        "    both curves strictly decreasing in p: {}",
        decreasing(&ma) && decreasing(&fpa)
    );
    let in_band = margin.is_some_and(|m| (1.5..=4.5).contains(&m));
    outcome(
        ordered && in_band,
        format!(
            "MA < FPA at all 7 points: {ordered}; power margin {} dB (in [1.5, 4.5])",
            margin.map_or("n/a".to_string(), |m| format!("{m:.3}"))
        ),
    )
}

fn region_sweep() -> Outcome {
    let cfg = ExperimentConfig {
        region_over_lambda: Sweep::Many(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
        power_dbm: Sweep::One(15.0),
        trials: 100,
        scheme: Scheme::Ma,
        optimizer: OptimizerConfig {
            multistarts: 8,
            ..Default::default()
        },
        ..Default::default()
    };
    let rows = harness::run_experiment(&cfg).unwrap();
    let ma: Vec<f64> = curve(&rows, Scheme::Ma).iter().map(|p| p.1).collect();
    println!(
        "    ma mean MSE vs A/lambda 1..6: {}",
        ma.iter().map(|m| format!("{m:.4e}")).collect::<Vec<_>>().join(", ")
    );
    let non_increasing = ma.windows(2).all(|w| w[1] <= w[0]);
    let early = ma[0] - ma[3];
    let late = ma[3] - ma[5];
    let ratio = late / early;
    outcome(
        non_increasing && early > 0.0 && ratio < 0.1,
        format!("non-increasing: {non_increasing}; (4->6 gain)/(1->4 gain) = {ratio:.4} (< 0.1)"),
    )
}

fn tiny_instance() -> Outcome {
    let params = ScenarioParams {
        num_sensors: 1,
        num_antennas: 1,
        num_paths: 1,
        ..Default::default()
    };
    let cfg = OptimizerConfig {
        multistarts: 8,
        ..Default::default()
    };
    let mut worst: f64 = f64::NEG_INFINITY;
    for seed in 0..20 {
        let mut rng = derive_trial_stream(SeedSpec::new(0x7177, seed));
        let s = generate_scenario(&params, &mut rng).unwrap();
        let rep = alternating_minimize(&s, &cfg, &mut rng).unwrap();

        // For one sensor and one antenna the jointly optimal (u, w) gives
        // MSE = sigma^2 / (sigma^2 + p |h(r)|^2); h is summed here directly.
        let path = s.sensors[0].paths()[0];
        let mu = s.sensors[0].path_loss();
        let p = s.power_budgets[0];
        let k0 = 2.0 * PI / s.wavelength;
        let gain_at = |x: f64, y: f64| {
            let phase = k0 * (x * path.elevation.sin() * path.azimuth.cos() + y * path.elevation.cos());
            mu.sqrt() * path.gain * Complex64::new(phase.cos(), -phase.sin())
        };
        let mut grid = f64::INFINITY;
        for i in 0..200 {
            for j in 0..200 {
                let x = s.region_size * i as f64 / 199.0;
                let y = s.region_size * j as f64 / 199.0;
                let h2 = gain_at(x, y).norm_sqr();
                grid = grid.min(s.noise_power / (s.noise_power + p * h2));
            }
        }
        worst = worst.max((rep.final_mse() - grid) / grid);
    }
    outcome(worst <= 1e-3, format!("max (alg - grid)/grid {worst:.3e} (<= 1e-3)"))
}

fn determinism(first_csv: &str) -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let rows = pool.install(|| harness::run_experiment(&power_sweep_config()).unwrap());
    let second = harness::to_csv(&rows);
    outcome(
        !first_csv.is_empty() && second == first_csv,
        format!("second run on a 3-thread pool: {} bytes, identical: {}", second.len(), second == first_csv),
    )
}

type Criterion = (&'static str, Duration, Box<dyn FnOnce(&mut String) -> Outcome>);

fn main() {
    let mut csv = String::new();
    let criteria: Vec<Criterion> = vec![
        ("1 surrogate consistency", Duration::from_secs(10), Box::new(|_| surrogate_consistency())),
        ("2 block optimality", Duration::from_secs(60), Box::new(|_| block_optimality())),
        ("3 gradient checks", Duration::from_secs(10), Box::new(|_| gradient_checks())),
        ("4 monotone convergence", Duration::from_secs(300), Box::new(|_| monotone_convergence())),
        ("5 power sweep", Duration::from_secs(900), Box::new(power_sweep)),
        ("6 region sweep", Duration::from_secs(900), Box::new(|_| region_sweep())),
        ("7 tiny-instance grid check", Duration::from_secs(300), Box::new(|_| tiny_instance())),
        ("8 determinism", Duration::from_secs(900), Box::new(|csv| determinism(csv))),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let out = run(&mut csv);
        let elapsed = start.elapsed();
        let ok = out.passed && elapsed <= limit;
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] criterion {name}: {} ({:.1}s, limit {}s)",
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
