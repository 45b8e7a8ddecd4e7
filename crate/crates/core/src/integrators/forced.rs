//! Forced and unforced discrete Euler–Lagrange schemes.
//!
//! The Lagrange–d'Alembert scheme uses the discrete forces
//! `f-(x_k, x_{k+1}) = h F(t_k)` and `f+(x_k, x_{k+1}) = -rho (x_{k+1} - x_k)`.

use crate::error::{Error, Result};
use crate::models::MechModel;
use crate::state::State;

use super::fvi::init_outcome;
use super::lagrangian::{check_finite, march, DiscreteMechLagrangian};
use super::{Integrator, IntegratorConfig, Trajectory};

fn damping_force(model: &MechModel, a: &State, b: &State) -> State {
    -(b - a).component_mul(model.damping())
}

/// Forced variational integrator with linear damping force.
pub fn lda_run(model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
    config.validate_for(model)?;
    let grid = config.grid()?;
    let h = config.h;
    let n = config.n_steps;
    let lag = DiscreteMechLagrangian::new(model, h, config.kappa);

    let init = init_outcome(model, config)?;
    let (x, iters) = march(
        &lag,
        &config.x0,
        init.root,
        n,
        config.newton_tol,
        config.newton_max_iter,
        |k, x| Ok(model.force_at(grid.t(k)) * h + damping_force(model, &x[k - 1], &x[k])),
    )?;
    check_finite(&x)?;

    let mut p = Vec::with_capacity(n + 1);
    p.push(config.p0.clone());
    for k in 1..n {
        p.push(-lag.d1(&x[k], &x[k + 1]) - model.force_at(grid.t(k)) * h);
    }
    p.push(lag.d2(&x[n - 1], &x[n]) + damping_force(model, &x[n - 1], &x[n]));

    let mut newton_iterations = vec![0, init.iterations];
    newton_iterations.extend(iters);
    Trajectory::new(model, grid, x, p, newton_iterations)
}

/// Unforced variational integrator `D1 L_d(x_k, x_{k+1}) + D2 L_d(x_{k-1}, x_k) = 0`.
///
/// Rejects damped or externally forced models.
pub fn vi_run(model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
    check_conservative(model)?;
    lda_run(model, config)
}

fn check_conservative(model: &MechModel) -> Result<()> {
    if model.is_damped() || model.force().is_some() {
        return Err(Error::Incompatible(
            "the plain variational integrator needs an undamped, unforced model; \
             use `lda` or `fvi` for dissipative systems"
                .into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Default, Clone, Copy)]
pub struct LagrangeDAlembert;

impl Integrator for LagrangeDAlembert {
    fn name(&self) -> &'static str {
        "lda"
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["forced-vi"]
    }

    fn description(&self) -> &'static str {
        "forced variational integrator with linear damping force"
    }

    fn run(&self, model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
        lda_run(model, config)
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct PlainVariational;

impl Integrator for PlainVariational {
    fn name(&self) -> &'static str {
        "vi"
    }

    fn description(&self) -> &'static str {
        "variational integrator for conservative systems"
    }

    fn validate(&self, model: &MechModel, config: &IntegratorConfig) -> Result<()> {
        config.validate_for(model)?;
        check_conservative(model)
    }

    fn run(&self, model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
        vi_run(model, config)
    }
}
