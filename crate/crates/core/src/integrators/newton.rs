use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::state::{max_abs, State};

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub root: State,
    pub iterations: usize,
    /// Infinity norm of the residual at `root`.
    pub residual: f64,
}

/// Newton's method on `residual(x) = 0`.
///
/// Stops as soon as `|residual|_inf <= tol`, so a guess that already
/// satisfies the tolerance returns after zero iterations. It also stops
/// once a correction falls below `4 eps max(1, |x|_inf)`: the residual is
/// then at its floating-point floor, which for large states can exceed an
/// absolute `tol`. Without an
/// analytic `jacobian` a forward-difference Jacobian with step
/// `1e-7 (1 + |x_i|)` is used.
pub fn newton_solve(
    mut residual: impl FnMut(&State) -> State,
    mut jacobian: Option<&mut dyn FnMut(&State) -> DMatrix<f64>>,
    guess: State,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome> {
    let mut x = guess;
    let mut r = residual(&x);
    let mut norm = max_abs(&r);
    let mut stalled = false;
    for iter in 0..=max_iter {
        if norm <= tol || (stalled && norm.is_finite()) {
            return Ok(NewtonOutcome {
                root: x,
                iterations: iter,
                residual: norm,
            });
        }
        if iter == max_iter || !norm.is_finite() {
            break;
        }
        let jac = match jacobian.as_mut() {
            Some(j) => j(&x),
            None => forward_difference_jacobian(&mut residual, &x, &r),
        };
        let Some(dx) = jac.lu().solve(&(-&r)) else {
            return Err(Error::NewtonDiverged {
                step: None,
                iterations: iter,
                residual: norm,
            });
        };
        x += &dx;
        stalled = max_abs(&dx) <= 4.0 * f64::EPSILON * max_abs(&x).max(1.0);
        r = residual(&x);
        norm = max_abs(&r);
    }
    Err(Error::NewtonDiverged {
        step: None,
        iterations: max_iter,
        residual: norm,
    })
}

fn forward_difference_jacobian(
    residual: &mut impl FnMut(&State) -> State,
    x: &State,
    r0: &State,
) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(r0.len(), n);
    for j in 0..n {
        let step = 1e-7 * (1.0 + x[j].abs());
        let mut xp = x.clone();
        xp[j] += step;
        let col = (residual(&xp) - r0) / step;
        jac.set_column(j, &col);
    }
    jac
}
