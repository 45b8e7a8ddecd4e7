//! Hamiltonian form of the fractional variational integrator.
//!
//! With `kappa = 0` the discrete Legendre transforms give the explicit update
//!
//! ```text
//! x_{k+1}       = x_k + h m⁻¹ (p_k + h F(t_k))
//! p^a_{k+1}     = -h rho D-[x]_{k+1}
//! p_{k+1}       = p_k + h F(t_k) - h grad U(x_{k+1}) + D-[p^a]_{k+1}
//! ```
//!
//! whose positions coincide with the Lagrangian scheme at `kappa = 0`.

use crate::error::Result;
use crate::fracops::{delta_minus, GrunwaldTable};
use crate::models::MechModel;
use crate::state::State;

use super::lagrangian::check_finite;
use super::{warn_fractional_order, Integrator, IntegratorConfig, Trajectory};

/// Phase-space point of the Hamiltonian scheme at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianState {
    pub x: State,
    pub p: State,
    /// Fractional momentum `p^a = -h rho D-[x]` paired with the mirror system.
    pub p_alpha: State,
}

/// Full phase-space history, including the fractional momenta.
pub fn ham_fvi_states(
    model: &MechModel,
    config: &IntegratorConfig,
) -> Result<Vec<HamiltonianState>> {
    config.validate_for(model)?;
    warn_fractional_order(config.alpha);
    let grid = config.grid()?;
    let h = config.h;
    let n = config.n_steps;
    let table = GrunwaldTable::new(config.alpha, n)?;
    let (m, rho) = (model.mass(), model.damping());

    let mut x = Vec::with_capacity(n + 1);
    let mut p = Vec::with_capacity(n + 1);
    let mut p_alpha: Vec<State> = Vec::with_capacity(n + 1);
    x.push(config.x0.clone());
    p.push(config.p0.clone());
    p_alpha.push(-delta_minus(&x[..1], &table, h)?.component_mul(rho) * h);
    for k in 0..n {
        let impulse = &p[k] + model.force_at(grid.t(k)) * h;
        x.push(&x[k] + impulse.component_div(m) * h);
        p_alpha.push(-delta_minus(&x[..k + 2], &table, h)?.component_mul(rho) * h);
        let memory = delta_minus(&p_alpha[..k + 2], &table, h)?;
        p.push(impulse - model.gradient(&x[k + 1]) * h + memory);
    }
    check_finite(&x)?;
    Ok(x.into_iter()
        .zip(p)
        .zip(p_alpha)
        .map(|((x, p), p_alpha)| HamiltonianState { x, p, p_alpha })
        .collect())
}

/// Runs the Hamiltonian scheme. The configured `kappa` is ignored: the
/// explicit form exists only for `kappa = 0`.
pub fn ham_fvi_run(model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
    let states = ham_fvi_states(model, config)?;
    let grid = config.grid()?;
    let n = states.len();
    let (x, p) = states.into_iter().map(|s| (s.x, s.p)).unzip();
    Trajectory::new(model, grid, x, p, vec![0; n])
}

#[derive(Debug, Default, Clone, Copy)]
pub struct HamiltonianFvi;

impl Integrator for HamiltonianFvi {
    fn name(&self) -> &'static str {
        "ham-fvi"
    }

    fn description(&self) -> &'static str {
        "fractional variational integrator in momentum-matching form (kappa = 0)"
    }

    fn run(&self, model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
        if config.kappa != 0.0 {
            log::debug!(
                "ham-fvi uses kappa = 0; ignoring configured {}",
                config.kappa
            );
        }
        ham_fvi_run(model, config)
    }
}
