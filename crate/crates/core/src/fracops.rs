//! Discrete fractional calculus on uniform grids.
//!
//! The Grünwald–Letnikov weights of order `alpha` are
//!
//! ```text
//! a_0 = 1,   a_n = -alpha (1 - alpha) (2 - alpha) ... (n - 1 - alpha) / n!
//! ```
//!
//! and drive the retarded and advanced difference operators
//!
//! ```text
//! D-[z]_k = h^-alpha * sum_{n=0}^{k}   a_n z_{k-n}
//! D+[z]_k = h^-alpha * sum_{n=0}^{N-k} a_n z_{k+n}
//! ```
//!
//! The composed operators `D-D-` and `D+D+` are evaluated through the
//! self-convolution `c_n = sum_j a_j a_{n-j}` of the weights, computed once
//! per table.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::state::Sequenceable;

/// Precomputed Grünwald–Letnikov weights and their convolution square for
/// one `(alpha, n_max)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GrunwaldTable {
    alpha: f64,
    coeffs: Vec<f64>,
    squared: Vec<f64>,
}

impl GrunwaldTable {
    /// Builds the table with weights `a_0..=a_{n_max}`.
    ///
    /// Uses the multiplicative recurrence `a_n = a_{n-1} (n - 1 - alpha) / n`,
    /// which avoids the factorials of the closed form.
    pub fn new(alpha: f64, n_max: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!(
                "fractional order must lie in [0, 1], got {alpha}"
            )));
        }
        let mut coeffs = Vec::with_capacity(n_max + 1);
        coeffs.push(1.0);
        for n in 1..=n_max {
            let prev = coeffs[n - 1];
            coeffs.push(prev * ((n as f64) - 1.0 - alpha) / (n as f64));
        }
        let squared = (0..=n_max)
            .map(|n| (0..=n).map(|j| coeffs[j] * coeffs[n - j]).sum())
            .collect();
        Ok(Self {
            alpha,
            coeffs,
            squared,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `a_0..=a_{n_max}`
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `c_0..=c_{n_max}`, the truncated self-convolution of the weights.
    pub fn squared(&self) -> &[f64] {
        &self.squared
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == 0 {
            return Err(Error::LengthMismatch {
                expected: 1,
                got: 0,
            });
        }
        if len - 1 > self.n_max() {
            return Err(Error::LengthMismatch {
                expected: self.n_max() + 1,
                got: len,
            });
        }
        Ok(())
    }
}

/// Convenience wrapper for [`GrunwaldTable::new`].
pub fn grunwald_coeffs(alpha: f64, n_max: usize) -> Result<GrunwaldTable> {
    GrunwaldTable::new(alpha, n_max)
}

/// Uniform time grid `t_k = a + h k`, `k = 0..=n_steps`.
///
/// A reversed grid enumerates the same nodes from the end: its `k`-th node
/// sits at the forward time `t_{N-k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    h: f64,
    n_steps: usize,
    reversed: bool,
}

impl Grid {
    pub fn new(a: f64, h: f64, n_steps: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Domain(format!("step must be positive, got {h}")));
        }
        if !a.is_finite() {
            return Err(Error::Domain(format!("start time must be finite, got {a}")));
        }
        if n_steps < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 steps, got {n_steps}"
            )));
        }
        Ok(Self {
            a,
            h,
            n_steps,
            reversed: false,
        })
    }

    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn t(&self, k: usize) -> f64 {
        let idx = if self.reversed { self.n_steps - k } else { k };
        self.a + self.h * idx as f64
    }

    pub fn end(&self) -> f64 {
        self.a + self.h * self.n_steps as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(move |k| self.t(k))
    }

    /// Same nodes, opposite direction label.
    pub fn reversed(&self) -> Self {
        Self {
            reversed: !self.reversed,
            ..*self
        }
    }
}

/// Retarded operator at the last index of `z = [z_0, .., z_k]`.
pub fn delta_minus<T: Sequenceable>(z: &[T], table: &GrunwaldTable, h: f64) -> Result<T> {
    table.check_len(z.len())?;
    let k = z.len() - 1;
    Ok(backward_sum(z, table.coeffs(), k).scaled(h.powf(-table.alpha())))
}

/// Advanced operator at the first index of `z = [z_k, .., z_N]`.
pub fn delta_plus<T: Sequenceable>(z: &[T], table: &GrunwaldTable, h: f64) -> Result<T> {
    table.check_len(z.len())?;
    Ok(forward_sum(z, table.coeffs()).scaled(h.powf(-table.alpha())))
}

/// `D-D-` at the last index of `z`, through the convolution square.
pub fn delta_minus_squared<T: Sequenceable>(z: &[T], table: &GrunwaldTable, h: f64) -> Result<T> {
    table.check_len(z.len())?;
    let k = z.len() - 1;
    Ok(backward_sum(z, table.squared(), k).scaled(h.powf(-2.0 * table.alpha())))
}

/// `D+D+` at the first index of `z`, through the convolution square.
pub fn delta_plus_squared<T: Sequenceable>(z: &[T], table: &GrunwaldTable, h: f64) -> Result<T> {
    table.check_len(z.len())?;
    Ok(forward_sum(z, table.squared()).scaled(h.powf(-2.0 * table.alpha())))
}

fn backward_sum<T: Sequenceable>(z: &[T], w: &[f64], k: usize) -> T {
    let mut acc = z[k].zeros_like();
    for (n, wn) in w.iter().enumerate().take(k + 1) {
        acc.axpy(*wn, &z[k - n]);
    }
    acc
}

fn forward_sum<T: Sequenceable>(z: &[T], w: &[f64]) -> T {
    let mut acc = z[0].zeros_like();
    for (zn, wn) in z.iter().zip(w) {
        acc.axpy(*wn, zn);
    }
    acc
}

/// Lower-triangular Toeplitz matrix stored by its first column.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerToeplitz {
    column: Vec<f64>,
}

impl LowerToeplitz {
    pub fn from_column(column: Vec<f64>) -> Self {
        Self { column }
    }

    pub fn dim(&self) -> usize {
        self.column.len()
    }

    pub fn column(&self) -> &[f64] {
        &self.column
    }

    /// Entry `(i, j)`: `column[i - j]` on and below the diagonal, zero above.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.column[i - j]
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok((0..x.len())
            .map(|i| (0..=i).map(|j| self.column[i - j] * x[j]).sum())
            .collect())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Discretization matrix of the order-`beta` retarded derivative on `grid`,
/// realized as `D-^{beta/2} D-^{beta/2}` so that `(M z)_k` equals
/// [`delta_minus_squared`] of `z_0..=z_k` with the order-`beta/2` table.
pub fn operator_matrix(beta: f64, grid: &Grid) -> Result<LowerToeplitz> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::Domain(format!(
            "operator order must lie in (0, 2], got {beta}"
        )));
    }
    let table = GrunwaldTable::new(beta / 2.0, grid.n_steps())?;
    let scale = grid.h().powf(-beta);
    Ok(LowerToeplitz::from_column(
        table.squared().iter().map(|c| c * scale).collect(),
    ))
}

/// Applies `delta_minus_squared` at every prefix of a scalar sequence.
pub fn delta_minus_squared_all(z: &[f64], table: &GrunwaldTable, h: f64) -> Result<Vec<f64>> {
    (1..=z.len())
        .map(|len| delta_minus_squared(&z[..len], table, h))
        .collect()
}
