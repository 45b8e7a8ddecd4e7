//! Lagrangian fractional variational integrator.
//!
//! Steps the restricted discrete Euler–Lagrange equations of the `x`-system,
//!
//! ```text
//! D1 L_d(x_k, x_{k+1}) + D2 L_d(x_{k-1}, x_k) - h rho D-D- x_k + h F(t_k) = 0,
//! ```
//!
//! for `x_{k+1}`. The memory term only reads `x_0..=x_k`.

use crate::error::Result;
use crate::fracops::{delta_minus_squared, delta_plus_squared, GrunwaldTable};
use crate::models::MechModel;
use crate::state::State;

use super::lagrangian::{check_finite, march, DiscreteMechLagrangian};
use super::newton::NewtonOutcome;
use super::{warn_fractional_order, Integrator, IntegratorConfig, Trajectory};

/// Solves the initialization condition `p_0 = -D1 L_d(x_0, x_1) - h F(t_0)`
/// for `x_1`.
pub fn fvi_init(model: &MechModel, config: &IntegratorConfig) -> Result<State> {
    config.validate_for(model)?;
    Ok(init_outcome(model, config)?.root)
}

pub(crate) fn init_outcome(model: &MechModel, config: &IntegratorConfig) -> Result<NewtonOutcome> {
    let h = config.h;
    let lag = DiscreteMechLagrangian::new(model, h, config.kappa);
    let known = &config.p0 + model.force_at(config.t0) * h;
    let guess = &config.x0 + config.p0.component_div(model.mass()) * h;
    lag.solve_d1(
        &config.x0,
        &known,
        guess,
        config.newton_tol,
        config.newton_max_iter,
    )
    .map_err(|e| e.at_step(1))
}

/// Runs the fractional variational integrator.
///
/// Momenta are the discrete Legendre transforms of the solution:
/// `p_k = -D1 L_d(x_k, x_{k+1}) - h F(t_k)` for `k < N` and
/// `p_N = D2 L_d(x_{N-1}, x_N) - h rho D-D- x_N`. The two agree at every
/// interior node by momentum matching; `p_0` is the configured value.
pub fn fvi_run(model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
    config.validate_for(model)?;
    warn_fractional_order(config.alpha);
    let grid = config.grid()?;
    let h = config.h;
    let n = config.n_steps;
    let table = GrunwaldTable::new(config.alpha, n)?;
    let lag = DiscreteMechLagrangian::new(model, h, config.kappa);
    let rho = model.damping();

    let init = init_outcome(model, config)?;
    let (x, iters) = march(
        &lag,
        &config.x0,
        init.root,
        n,
        config.newton_tol,
        config.newton_max_iter,
        |k, x| {
            let memory = delta_minus_squared(&x[..=k], &table, h)?;
            Ok(model.force_at(grid.t(k)) * h - memory.component_mul(rho) * h)
        },
    )?;
    check_finite(&x)?;

    let mut p = Vec::with_capacity(n + 1);
    p.push(config.p0.clone());
    for k in 1..n {
        p.push(-lag.d1(&x[k], &x[k + 1]) - model.force_at(grid.t(k)) * h);
    }
    let memory_n = delta_minus_squared(&x, &table, h)?;
    p.push(lag.d2(&x[n - 1], &x[n]) - memory_n.component_mul(rho) * h);

    let mut newton_iterations = vec![0, init.iterations];
    newton_iterations.extend(iters);
    Trajectory::new(model, grid, x, p, newton_iterations)
}

/// Residuals of the mirror (`y`) equations
///
/// ```text
/// D1 L_d(y_k, y_{k+1}) + D2 L_d(y_{k-1}, y_k) - h rho D+D+ y_k + h F = 0
/// ```
///
/// at interior nodes `k = 1..N-1`, for a sequence `y` given in its own
/// (reversed) time order. Forcing is read at the forward time of each node.
/// When `y` is a forward solution reversed and `kappa = 1/2`, every residual
/// is at the level of the forward Newton tolerance.
pub fn mirror_residuals(
    model: &MechModel,
    config: &IntegratorConfig,
    y: &[State],
) -> Result<Vec<State>> {
    let n = y.len() - 1;
    let h = config.h;
    let table = GrunwaldTable::new(config.alpha, n)?;
    let lag = DiscreteMechLagrangian::new(model, h, config.kappa);
    (1..n)
        .map(|k| {
            let memory = delta_plus_squared(&y[k..], &table, h)?;
            let t_forward = config.t0 + h * (n - k) as f64;
            Ok(lag.d1(&y[k], &y[k + 1]) + lag.d2(&y[k - 1], &y[k])
                - memory.component_mul(model.damping()) * h
                + model.force_at(t_forward) * h)
        })
        .collect()
}

/// Registry entry for [`fvi_run`].
#[derive(Debug, Default, Clone, Copy)]
pub struct FractionalVariational;

impl Integrator for FractionalVariational {
    fn name(&self) -> &'static str {
        "fvi"
    }

    fn description(&self) -> &'static str {
        "fractional variational integrator (Lagrangian form)"
    }

    fn run(&self, model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
        fvi_run(model, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ExternalForce, Free, MechModel};
    use nalgebra::DVector;
    use std::sync::Arc;

    fn oscillator() -> MechModel {
        MechModel::oscillator(1.0, 1.0, 0.2).unwrap()
    }

    fn free(rho: f64) -> MechModel {
        MechModel::new(
            DVector::from_element(1, 2.0),
            DVector::from_element(1, rho),
            Arc::new(Free),
        )
        .unwrap()
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        assert!(f(lo) * f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn init_free_particle() {
        let cfg = IntegratorConfig::scalar(0.1, 5, 0.3, 0.8);
        let x1 = fvi_init(&free(0.0), &cfg).unwrap();
        assert!((x1[0] - (0.3 + 0.1 * 0.8 / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn init_kappa_zero_drops_force_term() {
        let cfg = IntegratorConfig::scalar(0.2, 5, 1.0, 0.5).with_kappa(0.0);
        let x1 = fvi_init(&oscillator(), &cfg).unwrap();
        assert_eq!(x1[0], 1.0 + 0.2 * 0.5);
    }

    #[test]
    fn init_matches_bisection() {
        let cfg = IntegratorConfig::scalar(0.2, 5, 1.0, 0.5);
        let x1 = fvi_init(&oscillator(), &cfg).unwrap()[0];
        // p0 = (x1 - x0)/h + h kappa c (kappa x0 + (1 - kappa) x1)
        let root = bisect(
            |x1| (x1 - 1.0) / 0.2 + 0.2 * 0.5 * (0.5 + 0.5 * x1) - 0.5,
            0.0,
            2.0,
        );
        assert!((x1 - root).abs() < 1e-13);
        assert!((x1 - 5.45 / 5.05).abs() < 1e-14);
    }

    #[test]
    fn free_flight_is_exact() {
        for alpha in [0.0, 0.3, 0.5, 0.9] {
            let cfg = IntegratorConfig::scalar(0.1, 40, 0.5, -1.2).with_alpha(alpha);
            let traj = fvi_run(&free(0.0), &cfg).unwrap();
            for (k, x) in traj.x.iter().enumerate() {
                let want = 0.5 + k as f64 * 0.1 * (-1.2 / 2.0);
                assert!((x[0] - want).abs() < 1e-13, "k={k}");
            }
        }
    }

    #[test]
    fn trajectory_shape_and_initial_data() {
        let cfg = IntegratorConfig::scalar(0.2, 30, 1.0, 0.5);
        let traj = fvi_run(&oscillator(), &cfg).unwrap();
        assert_eq!(traj.len(), 31);
        assert_eq!(traj.p.len(), 31);
        assert_eq!(traj.energy.len(), 31);
        assert_eq!(traj.x[0][0], 1.0);
        assert_eq!(traj.p[0][0], 0.5);
        assert_eq!(traj.energy[0], 0.625);
    }

    #[test]
    fn momenta_satisfy_matching_at_interior_nodes() {
        let model = oscillator();
        let cfg = IntegratorConfig::scalar(0.1, 50, 1.0, 0.5).with_alpha(0.75);
        let traj = fvi_run(&model, &cfg).unwrap();
        let table = GrunwaldTable::new(0.75, 50).unwrap();
        let lag = DiscreteMechLagrangian::new(&model, 0.1, 0.5);
        for k in 1..50 {
            let memory = delta_minus_squared(&traj.x[..=k], &table, 0.1).unwrap();
            let p_plus = lag.d2(&traj.x[k - 1], &traj.x[k]) - memory * (0.2 * 0.1);
            assert!((p_plus[0] - traj.p[k][0]).abs() < 1e-11);
        }
    }

    #[test]
    fn causal_memory() {
        let model = oscillator();
        let cfg = IntegratorConfig::scalar(0.1, 40, 1.0, 0.5).with_alpha(0.75);
        let long = fvi_run(&model, &cfg).unwrap();
        let short = fvi_run(&model, &IntegratorConfig { n_steps: 20, ..cfg }).unwrap();
        for k in 0..=20 {
            assert_eq!(long.x[k], short.x[k]);
        }
    }

    #[test]
    fn mirror_equations_hold_for_reversed_solution() {
        let model = oscillator();
        for alpha in [0.25, 0.5, 0.75] {
            let cfg = IntegratorConfig::scalar(0.1, 60, 1.0, 0.5).with_alpha(alpha);
            let traj = fvi_run(&model, &cfg).unwrap();
            let y: Vec<State> = traj.x.iter().rev().cloned().collect();
            for r in mirror_residuals(&model, &cfg, &y).unwrap() {
                assert!(r.amax() <= cfg.newton_tol);
            }
        }
    }

    #[test]
    fn forced_run_starts_from_rest() {
        let model = MechModel::oscillator(1.0, 1.0, 1.0)
            .unwrap()
            .with_force(ExternalForce::scalar(&[(0.0, 1.0, 8.0)], 1).unwrap())
            .unwrap();
        let cfg = IntegratorConfig::scalar(0.1, 100, 0.0, 0.0).with_alpha(0.75);
        let traj = fvi_run(&model, &cfg).unwrap();
        assert!(traj.x[1][0] > 0.0);
        assert!(traj.x.iter().all(|x| x[0].is_finite()));
    }
}
