//! First-order Euler schemes for the linearly damped Hamiltonian system
//! `x' = p/m`, `p' = -grad U(x) - rho p/m + F(t)`.
//!
//! These integrate the `alpha = 1/2` limit regardless of the configured order.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::MechModel;
use crate::state::State;

use super::lagrangian::check_finite;
use super::newton::newton_solve;
use super::{Integrator, IntegratorConfig, Trajectory};

pub fn euler_explicit_run(model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
    config.validate_for(model)?;
    let grid = config.grid()?;
    let h = config.h;
    let (m, rho) = (model.mass(), model.damping());
    let mut x = vec![config.x0.clone()];
    let mut p = vec![config.p0.clone()];
    for k in 0..config.n_steps {
        let v = p[k].component_div(m);
        let dp = -model.gradient(&x[k]) - v.component_mul(rho) + model.force_at(grid.t(k));
        x.push(&x[k] + &v * h);
        p.push(&p[k] + dp * h);
    }
    check_finite(&x)?;
    let iters = vec![0; config.n_steps + 1];
    Trajectory::new(model, grid, x, p, iters)
}

/// Backward Euler; each step solves its `2d` equations in `(x, p)` by Newton.
pub fn euler_implicit_run(model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
    config.validate_for(model)?;
    let grid = config.grid()?;
    let h = config.h;
    let d = model.dim();
    let (m, rho) = (model.mass(), model.damping());
    let mut x = vec![config.x0.clone()];
    let mut p = vec![config.p0.clone()];
    let mut iters = vec![0];
    for k in 0..config.n_steps {
        let force = model.force_at(grid.t(k + 1));
        let (xk, pk) = (&x[k], &p[k]);
        let residual = |z: &State| implicit_residual(model, h, xk, pk, &force, z);
        let mut guess = State::zeros(2 * d);
        guess.rows_mut(0, d).copy_from(xk);
        guess.rows_mut(d, d).copy_from(pk);
        let out = if model.potential().hessian(xk).is_some() {
            let mut jac = |z: &State| {
                let hess = model
                    .potential()
                    .hessian(&z.rows(0, d).into_owned())
                    .expect("potential provides a Hessian");
                let mut j = DMatrix::identity(2 * d, 2 * d);
                for i in 0..d {
                    j[(i, d + i)] = -h / m[i];
                    j[(d + i, d + i)] += h * rho[i] / m[i];
                }
                let mut block = j.view_mut((d, 0), (d, d));
                block += hess * h;
                j
            };
            newton_solve(
                residual,
                Some(&mut jac),
                guess,
                config.newton_tol,
                config.newton_max_iter,
            )
        } else {
            newton_solve(
                residual,
                None,
                guess,
                config.newton_tol,
                config.newton_max_iter,
            )
        }
        .map_err(|e| e.at_step(k + 1))?;
        x.push(out.root.rows(0, d).into_owned());
        p.push(out.root.rows(d, d).into_owned());
        iters.push(out.iterations);
    }
    check_finite(&x)?;
    Trajectory::new(model, grid, x, p, iters)
}

/// Residual of `x' - x - h p'/m = 0`, `p' - p + h (grad U(x') + rho p'/m - F) = 0`
/// with `z = (x', p')`.
pub(crate) fn implicit_residual(
    model: &MechModel,
    h: f64,
    x: &State,
    p: &State,
    force: &State,
    z: &State,
) -> State {
    let d = model.dim();
    let xn = z.rows(0, d).into_owned();
    let pn = z.rows(d, d).into_owned();
    let v = pn.component_div(model.mass());
    let r1 = &xn - x - &v * h;
    let r2 = &pn - p + (model.gradient(&xn) + v.component_mul(model.damping()) - force) * h;
    let mut r = State::zeros(2 * d);
    r.rows_mut(0, d).copy_from(&r1);
    r.rows_mut(d, d).copy_from(&r2);
    r
}

fn check_half_order(config: &IntegratorConfig) -> Result<()> {
    if config.alpha != 0.5 {
        return Err(Error::Incompatible(format!(
            "Euler schemes integrate linear damping (alpha = 1/2), got alpha = {}",
            config.alpha
        )));
    }
    Ok(())
}

#[derive(Debug, Default, Clone, Copy)]
pub struct ExplicitEuler;

impl Integrator for ExplicitEuler {
    fn name(&self) -> &'static str {
        "euler-exp"
    }

    fn description(&self) -> &'static str {
        "explicit Euler for the linearly damped system"
    }

    fn validate(&self, model: &MechModel, config: &IntegratorConfig) -> Result<()> {
        config.validate_for(model)?;
        check_half_order(config)
    }

    fn run(&self, model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
        euler_explicit_run(model, config)
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct ImplicitEuler;

impl Integrator for ImplicitEuler {
    fn name(&self) -> &'static str {
        "euler-imp"
    }

    fn description(&self) -> &'static str {
        "implicit Euler for the linearly damped system"
    }

    fn validate(&self, model: &MechModel, config: &IntegratorConfig) -> Result<()> {
        config.validate_for(model)?;
        check_half_order(config)
    }

    fn run(&self, model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
        euler_implicit_run(model, config)
    }
}
