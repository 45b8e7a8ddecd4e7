//! Time-stepping schemes behind a common [`Integrator`] trait.
//!
//! Every scheme takes a [`MechModel`] and an [`IntegratorConfig`] and returns
//! a [`Trajectory`]. The [`IntegratorRegistry`] maps CLI tags to schemes.

mod euler;
mod forced;
mod fvi;
mod hamiltonian;
mod lagrangian;
mod newton;
mod registry;

pub use euler::{euler_explicit_run, euler_implicit_run, ExplicitEuler, ImplicitEuler};
pub use forced::{lda_run, vi_run, LagrangeDAlembert, PlainVariational};
pub use fvi::{fvi_init, fvi_run, mirror_residuals, FractionalVariational};
pub use hamiltonian::{ham_fvi_run, ham_fvi_states, HamiltonianFvi, HamiltonianState};
pub use lagrangian::DiscreteMechLagrangian;
pub use newton::{newton_solve, NewtonOutcome};
pub use registry::IntegratorRegistry;

use crate::error::{Error, Result};
use crate::fracops::Grid;
use crate::models::MechModel;
use crate::state::State;

pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;
pub const DEFAULT_NEWTON_MAX_ITER: usize = 50;

/// Run parameters shared by all schemes.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    /// Fractional order of the damping operator; the damping term has total order `2 alpha`.
    pub alpha: f64,
    /// Quadrature weight of the potential, `S z_k = kappa z_k + (1 - kappa) z_{k+1}`.
    pub kappa: f64,
    pub h: f64,
    pub n_steps: usize,
    pub t0: f64,
    pub x0: State,
    pub p0: State,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl IntegratorConfig {
    /// Defaults: `alpha = kappa = 1/2`, `t0 = 0`, Newton tolerance `1e-12`.
    pub fn new(h: f64, n_steps: usize, x0: State, p0: State) -> Self {
        Self {
            alpha: 0.5,
            kappa: 0.5,
            h,
            n_steps,
            t0: 0.0,
            x0,
            p0,
            newton_tol: DEFAULT_NEWTON_TOL,
            newton_max_iter: DEFAULT_NEWTON_MAX_ITER,
        }
    }

    pub fn scalar(h: f64, n_steps: usize, x0: f64, p0: f64) -> Self {
        Self::new(
            h,
            n_steps,
            State::from_element(1, x0),
            State::from_element(1, p0),
        )
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_newton(mut self, tol: f64, max_iter: usize) -> Self {
        self.newton_tol = tol;
        self.newton_max_iter = max_iter;
        self
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.t0, self.h, self.n_steps)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Domain(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::Domain(format!(
                "kappa must lie in [0, 1], got {}",
                self.kappa
            )));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::Domain(format!(
                "Newton tolerance must be positive, got {}",
                self.newton_tol
            )));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::Domain(
                "Newton iteration limit must be positive".into(),
            ));
        }
        if self.x0.len() != self.p0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.x0.len(),
                got: self.p0.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn validate_for(&self, model: &MechModel) -> Result<()> {
        self.validate()?;
        model.check_dim(&self.x0)?;
        model.check_dim(&self.p0)
    }
}

/// Message for orders outside the range covered by the known well-posedness
/// result (`alpha <= 1/2`).
pub fn fractional_order_warning(alpha: f64) -> Option<String> {
    (alpha > 0.5).then(|| {
        format!(
            "alpha = {alpha} exceeds 1/2; existence and uniqueness of the continuous \
             restricted dynamics is only established for alpha in [0, 1/2]"
        )
    })
}

pub(crate) fn warn_fractional_order(alpha: f64) {
    if std::env::var("FRACVI_WARN").is_ok_and(|v| v == "0") {
        return;
    }
    if let Some(msg) = fractional_order_warning(alpha) {
        log::warn!("{msg}");
    }
}

/// Discrete solution: positions, momenta and energies on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub x: Vec<State>,
    pub p: Vec<State>,
    pub energy: Vec<f64>,
    /// Newton iterations spent on each solved node (zero for explicit updates).
    pub newton_iterations: Vec<usize>,
}

impl Trajectory {
    pub fn new(
        model: &MechModel,
        grid: Grid,
        x: Vec<State>,
        p: Vec<State>,
        newton_iterations: Vec<usize>,
    ) -> Result<Self> {
        for seq in [&x, &p] {
            if seq.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    got: seq.len(),
                });
            }
        }
        let energy = x
            .iter()
            .zip(&p)
            .map(|(xk, pk)| model.energy(xk, pk))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            x,
            p,
            energy,
            newton_iterations,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, |x| x.len())
    }

    /// First component of every position, for scalar models.
    pub fn x_component(&self, i: usize) -> Vec<f64> {
        self.x.iter().map(|x| x[i]).collect()
    }
}

/// A time-stepping scheme selectable by name.
pub trait Integrator: Send + Sync {
    /// Registry tag, as accepted by `--integrator`.
    fn name(&self) -> &'static str;

    fn aliases(&self) -> &'static [&'static str] {
        &[]
    }

    fn description(&self) -> &'static str;

    /// Rejects model/config combinations the scheme does not integrate.
    fn validate(&self, model: &MechModel, config: &IntegratorConfig) -> Result<()> {
        config.validate_for(model)
    }

    fn run(&self, model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory>;
}
