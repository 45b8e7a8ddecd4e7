//! Reference solutions independent of the variational schemes.
//!
//! * [`exact_oscillator`]: closed form of `m x'' + rho x' + c x = 0`.
//! * [`exact_forced_oscillator`]: the same with piecewise-constant forcing,
//!   propagated analytically from breakpoint to breakpoint.
//! * [`matrix_oracle_solve`]: one-shot lower-triangular solve of
//!   `m x'' + rho D^beta x + c x = F` on a grid.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fracops::{operator_matrix, Grid, LowerToeplitz};
use crate::integrators::{Integrator, IntegratorConfig, Trajectory};
use crate::models::{ExternalForce, MechModel};
use crate::state::State;

/// Scalar linearly damped oscillator with initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub m: f64,
    pub c: f64,
    pub rho: f64,
    pub x0: f64,
    pub p0: f64,
}

impl OscillatorParams {
    /// Requires `m, c > 0`, `rho >= 0` and the underdamped regime `rho² < 4 m c`.
    pub fn new(m: f64, c: f64, rho: f64, x0: f64, p0: f64) -> Result<Self> {
        if !(m > 0.0 && c > 0.0 && rho >= 0.0) {
            return Err(Error::Domain(format!(
                "oscillator needs m, c > 0 and rho >= 0 (m={m}, c={c}, rho={rho})"
            )));
        }
        if rho * rho >= 4.0 * m * c {
            return Err(Error::Domain(format!(
                "oscillator is not underdamped: rho² = {} >= 4mc = {}",
                rho * rho,
                4.0 * m * c
            )));
        }
        Ok(Self { m, c, rho, x0, p0 })
    }

    fn decay(&self) -> f64 {
        self.rho / (2.0 * self.m)
    }

    fn damped_frequency(&self) -> f64 {
        let z = self.decay();
        (self.c / self.m - z * z).sqrt()
    }

    /// Homogeneous evolution of `(x, v)` over `tau`.
    fn propagate(&self, x: f64, v: f64, tau: f64) -> (f64, f64) {
        let z = self.decay();
        let w = self.damped_frequency();
        let a = x;
        let b = (v + z * x) / w;
        let (s, co) = (w * tau).sin_cos();
        let e = (-z * tau).exp();
        let xt = e * (a * co + b * s);
        let vt = e * ((b * w - z * a) * co - (a * w + z * b) * s);
        (xt, vt)
    }
}

/// `(x(t), p(t))` of the free damped oscillator.
pub fn exact_oscillator(params: &OscillatorParams, t: f64) -> (f64, f64) {
    let (x, v) = params.propagate(params.x0, params.p0 / params.m, t);
    (x, params.m * v)
}

/// `(x(t), p(t))` under a scalar piecewise-constant force starting at `t = 0`.
pub fn exact_forced_oscillator(
    params: &OscillatorParams,
    force: &ExternalForce,
    t: f64,
) -> (f64, f64) {
    let mut breaks: Vec<f64> = force
        .pieces()
        .iter()
        .flat_map(|p| [p.start, p.end])
        .filter(|b| *b > 0.0 && *b < t)
        .collect();
    breaks.push(t);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let (mut x, mut v) = (params.x0, params.p0 / params.m);
    let mut from = 0.0;
    for to in breaks {
        if to <= from {
            continue;
        }
        let f = force.at(0.5 * (from + to), 1)[0];
        let eq = f / params.c;
        let (dx, dv) = params.propagate(x - eq, v, to - from);
        x = eq + dx;
        v = dv;
        from = to;
    }
    (x, params.m * v)
}

/// Linear system of the triangular-matrix method for one component:
///
/// ```text
/// (m T_2 + rho T_beta + c I) x = F
/// ```
///
/// with rows 0 and 1 replaced by `x_0 = x0` and `(x_1 - x_0)/h = v0`.
/// `T_2` and `T_beta` are [`operator_matrix`] at orders 2 and `beta`. After
/// the row replacement the system stays lower triangular.
#[derive(Debug, Clone)]
pub struct MatrixOracleSystem {
    h: f64,
    m: f64,
    rho: f64,
    c: f64,
    second: LowerToeplitz,
    fractional: LowerToeplitz,
    rhs: Vec<f64>,
}

impl MatrixOracleSystem {
    pub fn new(
        grid: &Grid,
        beta: f64,
        m: f64,
        rho: f64,
        c: f64,
        x0: f64,
        v0: f64,
        force: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let second = operator_matrix(2.0, grid)?;
        let fractional = operator_matrix(beta, grid)?;
        let mut rhs: Vec<f64> = grid.times().map(force).collect();
        rhs[0] = x0;
        rhs[1] = v0;
        Ok(Self {
            h: grid.h(),
            m,
            rho,
            c,
            second,
            fractional,
            rhs,
        })
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Entry `(i, j)` of the assembled matrix.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match i {
            0 => f64::from(j == 0),
            1 => match j {
                0 => -1.0 / self.h,
                1 => 1.0 / self.h,
                _ => 0.0,
            },
            _ if j > i => 0.0,
            _ => {
                let d = i - j;
                let mut a =
                    self.m * self.second.column()[d] + self.rho * self.fractional.column()[d];
                if d == 0 {
                    a += self.c;
                }
                a
            }
        }
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    /// Forward substitution, `O(N²)` time and `O(N)` memory.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut x = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = self.rhs[i];
            for (j, xj) in x.iter().enumerate() {
                acc -= self.entry(i, j) * xj;
            }
            let diag = self.entry(i, i);
            if diag == 0.0 || !diag.is_finite() {
                return Err(Error::SingularMatrix { row: i });
            }
            x.push(acc / diag);
        }
        Ok(x)
    }

    /// Dense LU with partial pivoting; `O(N³)`, for cross-checking small systems.
    pub fn solve_dense(&self) -> Result<Vec<f64>> {
        let lu = self.dense().lu();
        lu.solve(&DVector::from_column_slice(&self.rhs))
            .map(|v| v.iter().copied().collect())
            .ok_or(Error::SingularMatrix { row: 0 })
    }

    /// `A x - b`, evaluated without assembling `A`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok((0..self.dim())
            .map(|i| (0..=i).map(|j| self.entry(i, j) * x[j]).sum::<f64>() - self.rhs[i])
            .collect())
    }
}

fn require_quadratic(model: &MechModel) -> Result<&State> {
    model
        .potential()
        .quadratic_stiffness()
        .ok_or_else(|| Error::Incompatible("oracles need a quadratic potential".into()))
}

/// Solves `m x'' + rho D^beta x + c x = F` from rest on `grid`, componentwise.
///
/// Momenta are reconstructed as `m (x_{k+1} - x_k)/h` (backward at the last node)
/// so the output carries the same columns as the integrators.
pub fn matrix_oracle_solve(model: &MechModel, grid: &Grid, beta: f64) -> Result<Trajectory> {
    let c = require_quadratic(model)?;
    let d = model.dim();
    let n = grid.len();
    let mut x = vec![State::zeros(d); n];
    for i in 0..d {
        let system = MatrixOracleSystem::new(
            grid,
            beta,
            model.mass()[i],
            model.damping()[i],
            c[i],
            0.0,
            0.0,
            |t| model.force_at(t)[i],
        )?;
        for (k, v) in system.solve()?.into_iter().enumerate() {
            x[k][i] = v;
        }
    }
    let h = grid.h();
    let p: Vec<State> = (0..n)
        .map(|k| {
            let (a, b) = if k + 1 < n { (k, k + 1) } else { (k - 1, k) };
            (&x[b] - &x[a]).component_mul(model.mass()) / h
        })
        .collect();
    Trajectory::new(model, *grid, x, p, vec![0; n])
}

/// Registry entry: triangular-matrix benchmark of order `beta = 2 alpha`.
#[derive(Debug, Default, Clone, Copy)]
pub struct MatrixOracle;

impl Integrator for MatrixOracle {
    fn name(&self) -> &'static str {
        "oracle-matrix"
    }

    fn description(&self) -> &'static str {
        "triangular-matrix benchmark solve of order 2*alpha (zero initial data)"
    }

    fn validate(&self, model: &MechModel, config: &IntegratorConfig) -> Result<()> {
        config.validate_for(model)?;
        require_quadratic(model)?;
        if config.alpha <= 0.0 {
            return Err(Error::Incompatible("oracle-matrix needs alpha > 0".into()));
        }
        if config.x0.iter().chain(config.p0.iter()).any(|v| *v != 0.0) {
            return Err(Error::Incompatible(
                "oracle-matrix requires zero initial data".into(),
            ));
        }
        Ok(())
    }

    fn run(&self, model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
        self.validate(model, config)?;
        matrix_oracle_solve(model, &config.grid()?, 2.0 * config.alpha)
    }
}

/// Registry entry: closed-form damped oscillator sampled on the grid.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactOracle;

impl ExactOracle {
    fn params(model: &MechModel, config: &IntegratorConfig) -> Result<Vec<OscillatorParams>> {
        let c = require_quadratic(model)?;
        (0..model.dim())
            .map(|i| {
                OscillatorParams::new(
                    model.mass()[i],
                    c[i],
                    model.damping()[i],
                    config.x0[i],
                    config.p0[i],
                )
            })
            .collect()
    }
}

impl Integrator for ExactOracle {
    fn name(&self) -> &'static str {
        "oracle-exact"
    }

    fn description(&self) -> &'static str {
        "closed-form underdamped oscillator (alpha = 1/2)"
    }

    fn validate(&self, model: &MechModel, config: &IntegratorConfig) -> Result<()> {
        config.validate_for(model)?;
        if config.alpha != 0.5 {
            return Err(Error::Incompatible(format!(
                "oracle-exact solves linear damping (alpha = 1/2), got alpha = {}",
                config.alpha
            )));
        }
        Self::params(model, config).map(|_| ())
    }

    fn run(&self, model: &MechModel, config: &IntegratorConfig) -> Result<Trajectory> {
        self.validate(model, config)?;
        let params = Self::params(model, config)?;
        let grid = config.grid()?;
        let d = model.dim();
        let components: Vec<Option<ExternalForce>> = (0..d)
            .map(|i| {
                model
                    .force()
                    .map(|f| {
                        let pieces: Vec<(f64, f64, f64)> = f
                            .pieces()
                            .iter()
                            .map(|p| (p.start, p.end, p.value[i]))
                            .collect();
                        ExternalForce::scalar(&pieces, 1)
                    })
                    .transpose()
            })
            .collect::<Result<_>>()?;
        let mut x = Vec::with_capacity(grid.len());
        let mut p = Vec::with_capacity(grid.len());
        for t in grid.times() {
            let mut xt = State::zeros(d);
            let mut pt = State::zeros(d);
            for i in 0..d {
                let local = params[i];
                let shifted = t - config.t0;
                let (xi, pi) = match &components[i] {
                    Some(f) => exact_forced_oscillator(&local, f, shifted),
                    None => exact_oscillator(&local, shifted),
                };
                xt[i] = xi;
                pt[i] = pi;
            }
            x.push(xt);
            p.push(pt);
        }
        Trajectory::new(model, grid, x, p, vec![0; grid.len()])
    }
}
