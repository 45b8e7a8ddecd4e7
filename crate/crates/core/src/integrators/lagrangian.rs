use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::MechModel;
use crate::state::State;

use super::newton::{newton_solve, NewtonOutcome};

/// `L_d(a, b) = (b - a)·m·(b - a) / 2h - h U(kappa a + (1 - kappa) b)`
/// and its slot derivatives.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteMechLagrangian<'a> {
    model: &'a MechModel,
    h: f64,
    kappa: f64,
}

impl<'a> DiscreteMechLagrangian<'a> {
    pub fn new(model: &'a MechModel, h: f64, kappa: f64) -> Self {
        Self { model, h, kappa }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn quadrature_point(&self, a: &State, b: &State) -> State {
        a * self.kappa + b * (1.0 - self.kappa)
    }

    pub fn value(&self, a: &State, b: &State) -> f64 {
        let v = b - a;
        0.5 * v.component_mul(self.model.mass()).dot(&v) / self.h
            - self.h * self.model.potential().value(&self.quadrature_point(a, b))
    }

    /// Derivative in the first slot.
    pub fn d1(&self, a: &State, b: &State) -> State {
        let grad = self.model.gradient(&self.quadrature_point(a, b));
        -(b - a).component_mul(self.model.mass()) / self.h - grad * (self.h * self.kappa)
    }

    /// Derivative in the second slot.
    pub fn d2(&self, a: &State, b: &State) -> State {
        let grad = self.model.gradient(&self.quadrature_point(a, b));
        (b - a).component_mul(self.model.mass()) / self.h - grad * (self.h * (1.0 - self.kappa))
    }

    /// `d/db D1 L_d(a, b)`, or `None` when the potential has no Hessian.
    pub fn d1_jacobian(&self, a: &State, b: &State) -> Option<DMatrix<f64>> {
        let hess = self
            .model
            .potential()
            .hessian(&self.quadrature_point(a, b))?;
        let mass = DMatrix::from_diagonal(self.model.mass());
        Some(-mass / self.h - hess * (self.h * self.kappa * (1.0 - self.kappa)))
    }

    /// Solves `D1 L_d(a, b) + known = 0` for `b`.
    ///
    /// Every variational step in this crate has this form: all other terms
    /// of the stationarity condition depend only on already known nodes.
    pub(crate) fn solve_d1(
        &self,
        a: &State,
        known: &State,
        guess: State,
        tol: f64,
        max_iter: usize,
    ) -> Result<NewtonOutcome> {
        let residual = |b: &State| self.d1(a, b) + known;
        if self.model.potential().hessian(a).is_some() {
            let mut jac = |b: &State| {
                self.d1_jacobian(a, b)
                    .expect("potential provides a Hessian")
            };
            newton_solve(residual, Some(&mut jac), guess, tol, max_iter)
        } else {
            newton_solve(residual, None, guess, tol, max_iter)
        }
    }
}

/// Shared two-step recursion of the variational schemes.
///
/// `extra(k, x)` returns every term of the step-`k` stationarity condition
/// besides `D1 L_d(x_k, x_{k+1}) + D2 L_d(x_{k-1}, x_k)`, evaluated on the
/// known prefix `x[..=k]`.
pub(crate) fn march(
    lag: &DiscreteMechLagrangian<'_>,
    x0: &State,
    x1: State,
    n_steps: usize,
    tol: f64,
    max_iter: usize,
    mut extra: impl FnMut(usize, &[State]) -> Result<State>,
) -> Result<(Vec<State>, Vec<usize>)> {
    let mut x = Vec::with_capacity(n_steps + 1);
    x.push(x0.clone());
    x.push(x1);
    let mut iterations = Vec::with_capacity(n_steps + 1);
    for k in 1..n_steps {
        let known = lag.d2(&x[k - 1], &x[k]) + extra(k, &x)?;
        let guess = &x[k] * 2.0 - &x[k - 1];
        let out = lag
            .solve_d1(&x[k], &known, guess, tol, max_iter)
            .map_err(|e| e.at_step(k + 1))?;
        iterations.push(out.iterations);
        x.push(out.root);
    }
    Ok((x, iterations))
}

pub(crate) fn check_finite(x: &[State]) -> Result<()> {
    match x.iter().position(|v| v.iter().any(|c| !c.is_finite())) {
        Some(k) => Err(Error::NewtonDiverged {
            step: Some(k),
            iterations: 0,
            residual: f64::INFINITY,
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn s(v: f64) -> State {
        DVector::from_element(1, v)
    }

    #[test]
    fn slot_derivatives_match_finite_differences() {
        let model = MechModel::oscillator(1.3, 0.8, 0.0).unwrap();
        for kappa in [0.0, 0.25, 0.5, 1.0] {
            let lag = DiscreteMechLagrangian::new(&model, 0.2, kappa);
            let (a, b) = (s(0.7), s(-0.4));
            let eps = 1e-6;
            let fd1 = (lag.value(&s(0.7 + eps), &b) - lag.value(&s(0.7 - eps), &b)) / (2.0 * eps);
            let fd2 = (lag.value(&a, &s(-0.4 + eps)) - lag.value(&a, &s(-0.4 - eps))) / (2.0 * eps);
            assert!((lag.d1(&a, &b)[0] - fd1).abs() < 1e-7);
            assert!((lag.d2(&a, &b)[0] - fd2).abs() < 1e-7);
            let fdj = (lag.d1(&a, &s(-0.4 + eps))[0] - lag.d1(&a, &s(-0.4 - eps))[0]) / (2.0 * eps);
            assert!((lag.d1_jacobian(&a, &b).unwrap()[(0, 0)] - fdj).abs() < 1e-6);
        }
    }
}
