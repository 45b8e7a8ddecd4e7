//! Mechanical models: diagonal mass and damping, a potential with
//! derivatives, and optional piecewise-constant forcing.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::state::State;

/// Potential energy `U(x)` with its gradient and, optionally, its Hessian.
pub trait Potential: Send + Sync + fmt::Debug {
    fn value(&self, x: &State) -> f64;

    fn gradient(&self, x: &State) -> State;

    /// `None` makes Newton solvers fall back to finite-difference Jacobians.
    fn hessian(&self, _x: &State) -> Option<DMatrix<f64>> {
        None
    }

    /// Stiffness diagonal when the potential is `x·c·x / 2`.
    fn quadratic_stiffness(&self) -> Option<&State> {
        None
    }
}

/// `U(x) = x·c·x / 2` with diagonal `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    stiffness: State,
}

impl Quadratic {
    pub fn new(stiffness: State) -> Result<Self> {
        if stiffness.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::Domain(format!(
                "quadratic stiffness must be positive, got {stiffness:?}"
            )));
        }
        Ok(Self { stiffness })
    }

    pub fn scalar(c: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, c))
    }
}

impl Potential for Quadratic {
    fn value(&self, x: &State) -> f64 {
        0.5 * x.component_mul(&self.stiffness).dot(x)
    }

    fn gradient(&self, x: &State) -> State {
        x.component_mul(&self.stiffness)
    }

    fn hessian(&self, _x: &State) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_diagonal(&self.stiffness))
    }

    fn quadratic_stiffness(&self) -> Option<&State> {
        Some(&self.stiffness)
    }
}

/// The zero potential (free particle).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Free;

impl Potential for Free {
    fn value(&self, _x: &State) -> f64 {
        0.0
    }

    fn gradient(&self, x: &State) -> State {
        DVector::zeros(x.len())
    }

    fn hessian(&self, x: &State) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(x.len(), x.len()))
    }
}

type ValueFn = dyn Fn(&State) -> f64 + Send + Sync;
type GradFn = dyn Fn(&State) -> State + Send + Sync;
type HessFn = dyn Fn(&State) -> DMatrix<f64> + Send + Sync;

/// User-supplied potential from closures.
#[derive(Clone)]
pub struct FnPotential {
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
    hessian: Option<Arc<HessFn>>,
}

impl FnPotential {
    pub fn new(
        value: impl Fn(&State) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&State) -> State + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: None,
        }
    }

    pub fn with_hessian(
        mut self,
        hessian: impl Fn(&State) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Arc::new(hessian));
        self
    }
}

impl fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnPotential")
            .field("hessian", &self.hessian.is_some())
            .finish()
    }
}

impl Potential for FnPotential {
    fn value(&self, x: &State) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &State) -> State {
        (self.gradient)(x)
    }

    fn hessian(&self, x: &State) -> Option<DMatrix<f64>> {
        self.hessian.as_ref().map(|h| h(x))
    }
}

/// One constant piece of an [`ExternalForce`], active on `[start, end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcePiece {
    pub start: f64,
    pub end: f64,
    pub value: State,
}

/// Piecewise-constant external force, zero outside its pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalForce {
    pieces: Vec<ForcePiece>,
}

impl ExternalForce {
    /// Pieces may touch at endpoints but must not overlap.
    pub fn new(mut pieces: Vec<ForcePiece>) -> Result<Self> {
        for p in &pieces {
            if !p.start.is_finite() || !p.end.is_finite() || p.start > p.end {
                return Err(Error::Domain(format!(
                    "invalid force interval [{}, {}]",
                    p.start, p.end
                )));
            }
            if p.value.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain("force values must be finite".into()));
            }
        }
        if let Some(first) = pieces.first() {
            let d = first.value.len();
            if let Some(p) = pieces.iter().find(|p| p.value.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.value.len(),
                });
            }
        }
        let mut sorted: Vec<&ForcePiece> = pieces.iter().collect();
        sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
        for w in sorted.windows(2) {
            if w[1].start < w[0].end {
                return Err(Error::Domain(format!(
                    "force intervals [{}, {}] and [{}, {}] overlap",
                    w[0].start, w[0].end, w[1].start, w[1].end
                )));
            }
        }
        pieces.shrink_to_fit();
        Ok(Self { pieces })
    }

    /// Scalar pieces `(start, end, value)` broadcast to `dim` components.
    pub fn scalar(pieces: &[(f64, f64, f64)], dim: usize) -> Result<Self> {
        Self::new(
            pieces
                .iter()
                .map(|&(start, end, v)| ForcePiece {
                    start,
                    end,
                    value: DVector::from_element(dim, v),
                })
                .collect(),
        )
    }

    pub fn pieces(&self) -> &[ForcePiece] {
        &self.pieces
    }

    pub fn dim(&self) -> Option<usize> {
        self.pieces.first().map(|p| p.value.len())
    }

    /// Intervals are closed; when two pieces share an endpoint the one
    /// listed last wins.
    pub fn at(&self, t: f64, dim: usize) -> State {
        self.pieces
            .iter()
            .rev()
            .find(|p| p.start <= t && t <= p.end)
            .map(|p| p.value.clone())
            .unwrap_or_else(|| DVector::zeros(dim))
    }
}

/// Free function form of [`ExternalForce::at`].
pub fn force_at(force: &ExternalForce, t: f64, dim: usize) -> State {
    force.at(t, dim)
}

/// Mass, damping, potential and optional forcing of a mechanical system.
#[derive(Debug, Clone)]
pub struct MechModel {
    mass: State,
    damping: State,
    potential: Arc<dyn Potential>,
    force: Option<ExternalForce>,
}

impl MechModel {
    pub fn new(mass: State, damping: State, potential: Arc<dyn Potential>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::Domain(
                "model needs at least one degree of freedom".into(),
            ));
        }
        if damping.len() != mass.len() {
            return Err(Error::DimensionMismatch {
                expected: mass.len(),
                got: damping.len(),
            });
        }
        if mass.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(Error::Domain(format!(
                "masses must be positive, got {mass:?}"
            )));
        }
        if damping.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::Domain(format!(
                "damping must be non-negative, got {damping:?}"
            )));
        }
        if let Some(c) = potential.quadratic_stiffness() {
            if c.len() != mass.len() {
                return Err(Error::DimensionMismatch {
                    expected: mass.len(),
                    got: c.len(),
                });
            }
        }
        Ok(Self {
            mass,
            damping,
            potential,
            force: None,
        })
    }

    /// Scalar damped oscillator `m x'' + rho x' + c x = 0`.
    pub fn oscillator(m: f64, c: f64, rho: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(1, m),
            DVector::from_element(1, rho),
            Arc::new(Quadratic::scalar(c)?),
        )
    }

    pub fn with_force(mut self, force: ExternalForce) -> Result<Self> {
        if let Some(d) = force.dim() {
            if d != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    got: d,
                });
            }
        }
        self.force = Some(force);
        Ok(self)
    }

    pub fn with_damping(mut self, damping: State) -> Result<Self> {
        let Self {
            mass,
            potential,
            force,
            ..
        } = self;
        self = Self::new(mass, damping, potential)?;
        self.force = force;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &State {
        &self.mass
    }

    pub fn damping(&self) -> &State {
        &self.damping
    }

    pub fn potential(&self) -> &dyn Potential {
        self.potential.as_ref()
    }

    pub fn force(&self) -> Option<&ExternalForce> {
        self.force.as_ref()
    }

    pub fn is_damped(&self) -> bool {
        self.damping.iter().any(|r| *r != 0.0)
    }

    /// External force at `t`; zero when the model is unforced.
    pub fn force_at(&self, t: f64) -> State {
        match &self.force {
            Some(f) => f.at(t, self.dim()),
            None => DVector::zeros(self.dim()),
        }
    }

    pub fn gradient(&self, x: &State) -> State {
        self.potential.gradient(x)
    }

    pub fn check_dim(&self, v: &State) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `p·m⁻¹·p / 2 + U(x)`
    pub fn energy(&self, x: &State, p: &State) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(p)?;
        let kinetic = 0.5 * p.component_div(&self.mass).dot(p);
        Ok(kinetic + self.potential.value(x))
    }
}

/// Free function form of [`MechModel::energy`].
pub fn energy(model: &MechModel, x: &State, p: &State) -> Result<f64> {
    model.energy(x, p)
}

/// Central finite-difference gradient, used to validate potentials.
pub fn finite_difference_gradient(potential: &dyn Potential, x: &State, eps: f64) -> State {
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += eps;
        xm[i] -= eps;
        g[i] = (potential.value(&xp) - potential.value(&xm)) / (2.0 * eps);
    }
    g
}
