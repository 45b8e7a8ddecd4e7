//! Fractional variational integrators for mechanical systems with
//! fractional damping `rho D^{2 alpha} x`.
//!
//! * [`fracops`]: Grünwald–Letnikov weights and the discrete retarded and
//!   advanced operators.
//! * [`models`]: mass, damping, potential and forcing.
//! * [`integrators`]: the fractional variational integrator and the
//!   comparison schemes, selectable through [`integrators::IntegratorRegistry`].
//! * [`oracles`]: closed-form and triangular-matrix reference solutions.
//! * [`analysis`]: global errors, convergence fits, trajectory utilities.
//! * [`cli`]: the `fracvi` command-line front end.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fracops;
pub mod integrators;
pub mod models;
pub mod oracles;
pub mod state;

pub use error::{Error, Result};
pub use fracops::{Grid, GrunwaldTable};
pub use integrators::{Integrator, IntegratorConfig, IntegratorRegistry, Trajectory};
pub use models::MechModel;
pub use state::State;
