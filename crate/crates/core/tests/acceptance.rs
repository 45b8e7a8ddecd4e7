//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracvi::analysis::{fit_slope, global_error_of, linear_trend, Quantity, Reference, Sample};
use fracvi::fracops::{delta_minus, delta_minus_squared, delta_plus, delta_plus_squared};
use fracvi::integrators::{
    euler_explicit_run, euler_implicit_run, fvi_run, ham_fvi_run, lda_run, IntegratorConfig,
};
use fracvi::models::ExternalForce;
use fracvi::oracles::{
    exact_oscillator, matrix_oracle_solve, MatrixOracleSystem, OscillatorParams,
};
use fracvi::{Grid, GrunwaldTable, MechModel};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

type Criterion = fn() -> Outcome;

fn oscillator(rho: f64) -> MechModel {
    MechModel::oscillator(1.0, 1.0, rho).unwrap()
}

fn oscillator_config(h: f64, n: usize) -> IntegratorConfig {
    IntegratorConfig::scalar(h, n, 1.0, 0.5).with_kappa(0.5)
}

fn exact_sample(params: &OscillatorParams, t: f64) -> Sample {
    let (x, p) = exact_oscillator(params, t);
    Sample {
        x: DVector::from_element(1, x),
        p: DVector::from_element(1, p),
        energy: 0.5 * p * p + 0.5 * x * x,
    }
}

fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn random_sequence(rng: &mut ChaCha8Rng, len: usize, pinned_ends: bool) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if pinned_ends {
        v[0] = 0.0;
        v[len - 1] = 0.0;
    }
    v
}

fn coefficient_collapse() -> Outcome {
    let table = GrunwaldTable::new(0.5, 2000).unwrap();
    let worst = table
        .squared()
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let want = match n {
                0 => 1.0,
                1 => -1.0,
                _ => 0.0,
            };
            (c - want).abs()
        })
        .fold(0.0, f64::max);
    Outcome::new(worst <= 1e-14, format!("max deviation {worst:.3e}"))
}

fn integration_by_parts() -> Outcome {
    let n = 64;
    let h = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for alpha in [0.25, 0.5, 0.75] {
        let table = GrunwaldTable::new(alpha, n).unwrap();
        for _ in 0..100 {
            let f = random_sequence(&mut rng, n + 1, true);
            let g = random_sequence(&mut rng, n + 1, true);
            let plus_g: Vec<f64> = (0..=n)
                .map(|k| delta_plus(&g[k..], &table, h).unwrap())
                .collect();
            let minus_f: Vec<f64> = (0..=n)
                .map(|k| delta_minus(&f[..=k], &table, h).unwrap())
                .collect();

            let lhs_b: f64 = (0..n).map(|k| plus_g[k] * f[k]).sum();
            let rhs_b: f64 = (1..=n).map(|k| g[k] * minus_f[k]).sum();
            let lhs_c: f64 = (0..n).map(|k| g[k + 1] * minus_f[k + 1]).sum();
            let rhs_c: f64 = (1..n).map(|k| plus_g[k] * f[k]).sum();
            for (a, b) in [(lhs_b, rhs_b), (lhs_c, rhs_c)] {
                pass &= close_rel(a, b, 1e-12);
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
            }
        }
    }
    Outcome::new(pass, format!("max relative gap {worst:.3e} over 300 pairs"))
}

fn time_reversal() -> Outcome {
    let n = 128;
    let h = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for alpha in [0.3, 0.5, 0.8] {
        let table = GrunwaldTable::new(alpha, n).unwrap();
        let x = random_sequence(&mut rng, n + 1, false);
        let y: Vec<f64> = x.iter().rev().copied().collect();
        for k in 0..=n {
            let a = delta_plus_squared(&y[k..], &table, h).unwrap();
            let b = delta_minus_squared(&x[..=n - k], &table, h).unwrap();
            pass &= close_rel(a, b, 1e-12);
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
        }
    }
    Outcome::new(pass, format!("max relative gap {worst:.3e}"))
}

fn fvi_lda_equivalence() -> Outcome {
    let model = oscillator(0.2);
    let cfg = oscillator_config(0.2, 150);
    let a = fvi_run(&model, &cfg).unwrap();
    let b = lda_run(&model, &cfg).unwrap();
    let diff =
        a.x.iter()
            .zip(&b.x)
            .map(|(u, v)| (u - v).amax())
            .fold(0.0, f64::max);
    Outcome::new(diff <= 1e-10, format!("max |x_fvi - x_lda| = {diff:.3e}"))
}

fn momentum_matching() -> Outcome {
    let model = oscillator(0.2);
    let cfg = oscillator_config(0.2, 500).with_kappa(0.0);
    let lag = fvi_run(&model, &cfg).unwrap();
    let ham = ham_fvi_run(&model, &cfg).unwrap();
    let scale = lag.x.iter().map(|x| x.amax()).fold(0.0, f64::max);
    let diff = lag
        .x
        .iter()
        .zip(&ham.x)
        .map(|(u, v)| (u - v).amax())
        .fold(0.0, f64::max);
    let rel = diff / scale;
    Outcome::new(
        rel <= 1e-12,
        format!("max gap relative to max |x|: {rel:.3e}"),
    )
}

fn convergence_half_order() -> Outcome {
    let model = oscillator(0.2);
    let params = OscillatorParams::new(1.0, 1.0, 0.2, 1.0, 0.5).unwrap();
    let exact = |t: f64| exact_sample(&params, t);
    let h_values = [0.4, 0.2, 0.1, 0.05, 0.025];
    let trajectories: Vec<_> = h_values
        .iter()
        .map(|&h| fvi_run(&model, &oscillator_config(h, (6.0 / h).round() as usize)).unwrap())
        .collect();
    let mut pass = true;
    let mut detail = Vec::new();
    for q in [Quantity::Position, Quantity::Momentum, Quantity::Energy] {
        let errors: Vec<f64> = trajectories
            .iter()
            .map(|t| global_error_of(q, t, &Reference::Function(&exact)).unwrap())
            .collect();
        let slope = fit_slope(&h_values, &errors).unwrap().slope;
        let tail = fit_slope(&h_values[2..], &errors[2..]).unwrap().slope;
        pass &= (0.85..=1.05).contains(&slope);
        detail.push(format!("{q}: slope {slope:.3} (h <= 0.1: {tail:.3})"));
    }
    Outcome::new(pass, detail.join(", "))
}

fn test_equation() -> MechModel {
    MechModel::oscillator(1.0, 1.0, 1.0)
        .unwrap()
        .with_force(ExternalForce::scalar(&[(0.0, 1.0, 8.0)], 1).unwrap())
        .unwrap()
}

fn convergence_three_quarter_order() -> Outcome {
    let model = test_equation();
    let oracle_h = 5e-3;
    let reference =
        matrix_oracle_solve(&model, &Grid::new(0.0, oracle_h, 6000).unwrap(), 1.5).unwrap();
    let h_values = [0.2, 0.1, 0.05];
    let errors: Vec<f64> = h_values
        .iter()
        .map(|&h| {
            let cfg = IntegratorConfig::scalar(h, (30.0 / h).round() as usize, 0.0, 0.0)
                .with_alpha(0.75)
                .with_kappa(0.5);
            let traj = fvi_run(&model, &cfg).unwrap();
            global_error_of(
                Quantity::Position,
                &traj,
                &Reference::Trajectory(&reference),
            )
            .unwrap()
        })
        .collect();
    let slope = fit_slope(&h_values, &errors).unwrap().slope;
    Outcome::new(
        (0.8..=1.1).contains(&slope),
        format!(
            "slope {slope:.3}, errors {:?}",
            errors
                .iter()
                .map(|e| format!("{e:.3e}"))
                .collect::<Vec<_>>()
        ),
    )
}

fn energy_fidelity() -> Outcome {
    let model = oscillator(0.2);
    let params = OscillatorParams::new(1.0, 1.0, 0.2, 1.0, 0.5).unwrap();
    let exact = |t: f64| exact_sample(&params, t);
    let energy_error = |traj: fracvi::Result<fracvi::Trajectory>| {
        global_error_of(
            Quantity::Energy,
            &traj.unwrap(),
            &Reference::Function(&exact),
        )
        .unwrap()
    };
    let fvi = energy_error(fvi_run(&model, &oscillator_config(0.2, 150)));
    let explicit = energy_error(euler_explicit_run(&model, &oscillator_config(0.1, 300)));
    let implicit = energy_error(euler_implicit_run(&model, &oscillator_config(0.2, 150)));
    Outcome::new(
        fvi < explicit && fvi < implicit,
        format!("fvi {fvi:.3e}, explicit Euler {explicit:.3e}, implicit Euler {implicit:.3e}"),
    )
}

fn oracle_self_consistency() -> Outcome {
    let grid = Grid::new(0.0, 5e-3, 6000).unwrap();
    let force = |t: f64| if t <= 1.0 { 8.0 } else { 0.0 };
    let system = MatrixOracleSystem::new(&grid, 1.5, 1.0, 1.0, 1.0, 0.0, 0.0, force).unwrap();
    let x = system.solve().unwrap();
    let residual = system
        .residual(&x)
        .unwrap()
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.abs()));
    let f_norm = system.rhs().iter().fold(0.0_f64, |m, f| m.max(f.abs()));
    let bound = 1e-10 * (1.0 + f_norm);

    let free = MatrixOracleSystem::new(&grid, 1.5, 1.0, 1.0, 1.0, 0.0, 0.0, |_| 0.0).unwrap();
    let zero = free.solve().unwrap().iter().all(|v| *v == 0.0);
    Outcome::new(
        residual <= bound && zero,
        format!("residual {residual:.3e} (bound {bound:.3e}), unforced solution identically zero: {zero}"),
    )
}

fn conservative_limit() -> Outcome {
    let model = oscillator(0.0);
    let traj = fvi_run(&model, &oscillator_config(0.1, 10_000)).unwrap();
    let e0 = traj.energy[0];
    let rel: Vec<f64> = traj.energy.iter().map(|e| (e - e0) / e0).collect();
    let spread = rel.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let drift = linear_trend(&rel);
    Outcome::new(
        spread <= 5e-2 && drift.abs() <= 1e-6,
        format!("max relative deviation {spread:.3e}, drift {drift:.3e} per step"),
    )
}

fn main() -> ExitCode {
    std::env::set_var("FRACVI_WARN", "0");
    let criteria: [(&str, Criterion, Option<Duration>); 10] = [
        (
            "coefficient collapse at alpha = 1/2",
            coefficient_collapse,
            Some(Duration::from_secs(1)),
        ),
        (
            "discrete integration by parts",
            integration_by_parts,
            Some(Duration::from_secs(1)),
        ),
        ("discrete time reversal", time_reversal, None),
        (
            "FVI / Lagrange-d'Alembert equivalence",
            fvi_lda_equivalence,
            Some(Duration::from_secs(1)),
        ),
        ("momentum matching", momentum_matching, None),
        (
            "convergence, alpha = 1/2",
            convergence_half_order,
            Some(Duration::from_secs(10)),
        ),
        (
            "convergence, alpha = 3/4",
            convergence_three_quarter_order,
            Some(Duration::from_secs(60)),
        ),
        ("energy fidelity vs Euler", energy_fidelity, None),
        (
            "matrix oracle self-consistency",
            oracle_self_consistency,
            None,
        ),
        ("conservative limit", conservative_limit, None),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed < b);
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        let timing = match budget {
            Some(b) => format!("{elapsed:.2?} of {b:.0?}"),
            None => format!("{elapsed:.2?}"),
        };
        println!(
            "criterion {:>2} {} {name}: {} [{timing}]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
