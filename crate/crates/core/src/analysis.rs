//! Error metrics, convergence-order fits and trajectory utilities.

use std::fmt;

use crate::error::{Error, Result};
use crate::integrators::Trajectory;
use crate::models::MechModel;
use crate::state::{max_abs, State};

/// Quantity compared by [`global_error_of`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Position,
    Momentum,
    Energy,
}

impl Quantity {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "x" | "position" => Some(Self::Position),
            "p" | "momentum" => Some(Self::Momentum),
            "E" | "e" | "energy" => Some(Self::Energy),
            _ => None,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Position => "x",
            Self::Momentum => "p",
            Self::Energy => "E",
        })
    }
}

/// Reference value at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: State,
    pub p: State,
    pub energy: f64,
}

/// What a trajectory is measured against.
pub enum Reference<'a> {
    /// Exact solution evaluated at each node time.
    Function(&'a dyn Fn(f64) -> Sample),
    /// Discrete solution on the same grid or on a refinement of it by an
    /// integer factor; coincident nodes are compared.
    Trajectory(&'a Trajectory),
}

/// `max_k |x_k - x_ref(t_k)|` over all nodes and components.
pub fn global_error(traj: &Trajectory, reference: &Reference<'_>) -> Result<f64> {
    global_error_of(Quantity::Position, traj, reference)
}

pub fn global_error_of(
    quantity: Quantity,
    traj: &Trajectory,
    reference: &Reference<'_>,
) -> Result<f64> {
    let pick = |x: &State, p: &State, e: f64| -> Vec<f64> {
        match quantity {
            Quantity::Position => x.iter().copied().collect(),
            Quantity::Momentum => p.iter().copied().collect(),
            Quantity::Energy => vec![e],
        }
    };
    let mut worst = 0.0_f64;
    match reference {
        Reference::Function(f) => {
            for k in 0..traj.len() {
                let s = f(traj.grid.t(k));
                let a = pick(&traj.x[k], &traj.p[k], traj.energy[k]);
                let b = pick(&s.x, &s.p, s.energy);
                if a.len() != b.len() {
                    return Err(Error::DimensionMismatch {
                        expected: a.len(),
                        got: b.len(),
                    });
                }
                worst = a
                    .iter()
                    .zip(&b)
                    .fold(worst, |m, (u, v)| m.max((u - v).abs()));
            }
        }
        Reference::Trajectory(r) => {
            let stride = refinement(traj, r)?;
            for k in 0..traj.len() {
                let j = k * stride;
                let a = pick(&traj.x[k], &traj.p[k], traj.energy[k]);
                let b = pick(&r.x[j], &r.p[j], r.energy[j]);
                worst = a
                    .iter()
                    .zip(&b)
                    .fold(worst, |m, (u, v)| m.max((u - v).abs()));
            }
        }
    }
    Ok(worst)
}

/// Integer ratio between the coarse step and the reference step.
fn refinement(coarse: &Trajectory, fine: &Trajectory) -> Result<usize> {
    let (gc, gf) = (&coarse.grid, &fine.grid);
    if gc.is_reversed() != gf.is_reversed() {
        return Err(Error::GridMismatch(
            "grids run in opposite directions".into(),
        ));
    }
    if (gc.start() - gf.start()).abs() > 1e-12 * gc.h() {
        return Err(Error::GridMismatch(format!(
            "start times differ: {} vs {}",
            gc.start(),
            gf.start()
        )));
    }
    let ratio = gc.h() / gf.h();
    let stride = ratio.round();
    if stride < 1.0 || (ratio - stride).abs() > 1e-9 * ratio {
        return Err(Error::GridMismatch(format!(
            "step {} is not an integer multiple of reference step {}",
            gc.h(),
            gf.h()
        )));
    }
    let stride = stride as usize;
    if gc.n_steps() * stride > gf.n_steps() {
        return Err(Error::GridMismatch(format!(
            "reference ends at {} before the trajectory ({})",
            gf.end(),
            gc.end()
        )));
    }
    if coarse.dim() != fine.dim() {
        return Err(Error::DimensionMismatch {
            expected: coarse.dim(),
            got: fine.dim(),
        });
    }
    Ok(stride)
}

/// Global errors against step size with their least-squares log–log fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub h_values: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
}

impl ConvergenceReport {
    /// Rows `h,error,fitted_slope`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,error,fitted_slope\n");
        for (h, e) in self.h_values.iter().zip(&self.errors) {
            out.push_str(&format!("{h:.16e},{e:.16e},{:.16e}\n", self.slope));
        }
        out
    }

    /// Residual of the fit, `max |log e - (intercept + slope log h)|`.
    pub fn fit_residual(&self) -> f64 {
        self.h_values
            .iter()
            .zip(&self.errors)
            .map(|(h, e)| (e.ln() - self.intercept - self.slope * h.ln()).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>12}  {:>14}", "h", "global error")?;
        for (h, e) in self.h_values.iter().zip(&self.errors) {
            writeln!(f, "{h:>12.6}  {e:>14.6e}")?;
        }
        write!(f, "fitted order: {:.4}", self.slope)
    }
}

/// Ordinary least squares of `log error` on `log h`.
pub fn fit_slope(h_values: &[f64], errors: &[f64]) -> Result<ConvergenceReport> {
    if h_values.len() != errors.len() {
        return Err(Error::LengthMismatch {
            expected: h_values.len(),
            got: errors.len(),
        });
    }
    if h_values.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 step sizes, got {}",
            h_values.len()
        )));
    }
    if h_values.windows(2).any(|w| !(w[1] < w[0])) || h_values.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::DegenerateFit(
            "step sizes must be positive and strictly decreasing".into(),
        ));
    }
    if let Some(i) = errors.iter().position(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::DegenerateFit(format!(
            "error at h = {} is {}; cannot take its logarithm",
            h_values[i], errors[i]
        )));
    }
    let lx: Vec<f64> = h_values.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (slope, intercept) = least_squares(&lx, &ly);
    Ok(ConvergenceReport {
        h_values: h_values.to_vec(),
        errors: errors.to_vec(),
        slope,
        intercept,
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least-squares slope of `values` against their index.
pub fn linear_trend(values: &[f64]) -> f64 {
    let idx: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
    least_squares(&idx, values).0
}

/// `E_k` for every node of `traj` under `model`.
pub fn energy_series(model: &MechModel, traj: &Trajectory) -> Result<Vec<f64>> {
    traj.x
        .iter()
        .zip(&traj.p)
        .map(|(x, p)| model.energy(x, p))
        .collect()
}

/// `max_k |x^A_k - x^B_k|`.
pub fn compare(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    a.x.iter()
        .zip(&b.x)
        .map(|(u, v)| {
            if u.len() != v.len() {
                return Err(Error::DimensionMismatch {
                    expected: u.len(),
                    got: v.len(),
                });
            }
            Ok(max_abs(&(u - v)))
        })
        .try_fold(0.0_f64, |m, d| Ok(m.max(d?)))
}

/// Time reversal `x_k -> x_{N-k}`. Momenta change sign with the direction
/// of time; energies are reordered.
pub fn reverse(traj: &Trajectory) -> Trajectory {
    Trajectory {
        grid: traj.grid.reversed(),
        x: traj.x.iter().rev().cloned().collect(),
        p: traj.p.iter().rev().map(|p| -p).collect(),
        energy: traj.energy.iter().rev().copied().collect(),
        newton_iterations: traj.newton_iterations.iter().rev().copied().collect(),
    }
}
