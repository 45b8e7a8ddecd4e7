//! State vectors and the small amount of arithmetic the discrete operators need.

use nalgebra::DVector;

/// Configuration-space state (or momentum). Components are independent
/// under the diagonal mass and damping structure.
pub type State = DVector<f64>;

/// Values the fractional operators can be applied to: scalars and state vectors.
pub trait Sequenceable: Clone {
    fn zeros_like(&self) -> Self;
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);
    fn scaled(self, a: f64) -> Self;
}

impl Sequenceable for f64 {
    fn zeros_like(&self) -> Self {
        0.0
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }

    fn scaled(self, a: f64) -> Self {
        self * a
    }
}

impl Sequenceable for DVector<f64> {
    fn zeros_like(&self) -> Self {
        DVector::zeros(self.len())
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        DVector::axpy(self, a, x, 1.0);
    }

    fn scaled(self, a: f64) -> Self {
        self * a
    }
}

/// Infinity norm.
pub fn max_abs(v: &State) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
