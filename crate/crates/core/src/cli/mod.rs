//! `fracvi` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 solver failure.

mod output;
mod settings;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::{fit_slope, global_error_of, ConvergenceReport, Quantity, Reference};
use crate::error::Error;
use crate::fracops::GrunwaldTable;
use crate::integrators::{Integrator, IntegratorConfig, IntegratorRegistry, Trajectory};

pub use output::{trajectory_csv, write_atomic};
pub use settings::{parse_force, steps_for, ModelKind, RunSpec, Settings, KNOWN_KEYS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Solver(Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Solver(_) => 2,
            Self::Usage(_) | Self::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NewtonDiverged { .. } | Error::SingularMatrix { .. } => Self::Solver(e),
            other => Self::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fracvi", version, about = "Fractional variational integrators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print n, alpha_n, c_n for n = 0..=N.
    Coeffs {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, short = 'n', default_value_t = 10)]
        n: usize,
    },
    /// Integrate one configuration and write its trajectory as CSV.
    Run(RunArgs),
    /// Print the maximum difference between two integrators on one configuration.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Integrator compared against `--integrator`.
        #[arg(long)]
        against: Option<String>,
        /// x, p or E.
        #[arg(long)]
        quantity: Option<String>,
    },
    /// Global error against a reference solution over a list of step sizes.
    Converge {
        #[command(flatten)]
        run: RunArgs,
        /// exact or matrix.
        #[arg(long)]
        reference: Option<String>,
        /// Comma-separated, strictly decreasing steps.
        #[arg(long)]
        h_list: Option<String>,
        /// Step of the matrix reference.
        #[arg(long)]
        oracle_h: Option<String>,
        /// x, p or E.
        #[arg(long)]
        quantity: Option<String>,
    },
    /// List the registered integrators.
    List,
}

/// Options shared by the commands that build a model and a step configuration.
/// Every option can also be given in the `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub integrator: Option<String>,
    /// oscillator, fractional-test or quadratic.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub kappa: Option<String>,
    /// Damping, scalar or one value per component.
    #[arg(long)]
    pub rho: Option<String>,
    /// Stiffness of the quadratic potential.
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long)]
    pub mass: Option<String>,
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    /// Final time when `--steps` is absent.
    #[arg(long)]
    pub horizon: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<String>,
    /// Piecewise-constant force, `t0:t1:value;...`.
    #[arg(long, allow_hyphen_values = true)]
    pub force: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub newton_tol: Option<String>,
    #[arg(long)]
    pub newton_max_iter: Option<String>,
}

impl RunArgs {
    /// Config file overlaid with the flags that were given.
    pub fn settings(&self, extra: &[(&str, &Option<String>)]) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        let out = self.out.as_ref().map(|p| p.to_string_lossy().into_owned());
        let flags: [(&str, &Option<String>); 15] = [
            ("integrator", &self.integrator),
            ("model", &self.model),
            ("alpha", &self.alpha),
            ("kappa", &self.kappa),
            ("rho", &self.rho),
            ("c", &self.c),
            ("mass", &self.mass),
            ("h", &self.h),
            ("steps", &self.steps),
            ("horizon", &self.horizon),
            ("x0", &self.x0),
            ("p0", &self.p0),
            ("force", &self.force),
            ("newton-tol", &self.newton_tol),
            ("newton-max-iter", &self.newton_max_iter),
        ];
        for (key, value) in flags.iter().chain(extra).chain([("out", &out)].iter()) {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        Ok(s)
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fracvi: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let registry = IntegratorRegistry::with_builtins();
    match cli.command {
        Command::Coeffs { alpha, n } => cmd_coeffs(alpha, n, out),
        Command::Run(args) => cmd_run(
            &registry,
            &RunSpec::from_settings(&args.settings(&[])?)?,
            out,
        ),
        Command::Compare {
            run,
            against,
            quantity,
        } => {
            let s = run.settings(&[("against", &against), ("quantity", &quantity)])?;
            cmd_compare(&registry, &s, out)
        }
        Command::Converge {
            run,
            reference,
            h_list,
            oracle_h,
            quantity,
        } => {
            let s = run.settings(&[
                ("reference", &reference),
                ("h-list", &h_list),
                ("oracle-h", &oracle_h),
                ("quantity", &quantity),
            ])?;
            cmd_converge(&registry, &s, out)
        }
        Command::List => {
            for integrator in registry.iter() {
                let aliases = integrator.aliases();
                if aliases.is_empty() {
                    writeln!(
                        out,
                        "{:<14} {}",
                        integrator.name(),
                        integrator.description()
                    )?;
                } else {
                    writeln!(
                        out,
                        "{:<14} {} (alias: {})",
                        integrator.name(),
                        integrator.description(),
                        aliases.join(", ")
                    )?;
                }
            }
            Ok(())
        }
    }
}

/// One line `n, alpha_n, c_n` per index.
pub fn cmd_coeffs(alpha: f64, n: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let table = GrunwaldTable::new(alpha, n)?;
    for (k, (a, c)) in table.coeffs().iter().zip(table.squared()).enumerate() {
        writeln!(out, "{k}, {a:.16e}, {c:.16e}")?;
    }
    Ok(())
}

fn lookup<'r>(
    registry: &'r IntegratorRegistry,
    name: &str,
) -> Result<&'r dyn Integrator, CliError> {
    registry.get(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown integrator '{name}' (available: {})",
            registry.names().join(", ")
        ))
    })
}

fn run_checked(
    integrator: &dyn Integrator,
    spec: &RunSpec,
    config: &IntegratorConfig,
) -> Result<Trajectory, CliError> {
    integrator.validate(&spec.model, config)?;
    Ok(integrator.run(&spec.model, config)?)
}

/// Trajectory CSV to `--out`, or to `out` when no path is set.
pub fn cmd_run(
    registry: &IntegratorRegistry,
    spec: &RunSpec,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let integrator = lookup(registry, &spec.integrator)?;
    let traj = run_checked(integrator, spec, &spec.config)?;
    let csv = trajectory_csv(&traj);
    match &spec.out {
        Some(path) => {
            write_atomic(path, &csv)?;
            log::info!("wrote {} rows to {}", traj.len(), path.display());
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn quantity(s: &Settings) -> Result<Quantity, CliError> {
    let q = s.get("quantity").unwrap_or("x");
    Quantity::parse(q).ok_or_else(|| CliError::Usage(format!("unknown quantity '{q}' (x, p or E)")))
}

/// Prints the maximum pointwise difference of the chosen quantity.
pub fn cmd_compare(
    registry: &IntegratorRegistry,
    s: &Settings,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let spec = RunSpec::from_settings(s)?;
    let against = s
        .get("against")
        .ok_or_else(|| CliError::Usage("compare needs --against <integrator>".into()))?;
    let q = quantity(s)?;
    let a = run_checked(lookup(registry, &spec.integrator)?, &spec, &spec.config)?;
    let b = run_checked(lookup(registry, against)?, &spec, &spec.config)?;
    let diff = global_error_of(q, &a, &Reference::Trajectory(&b))?;
    writeln!(out, "{diff:.16e}")?;
    Ok(())
}

/// Convergence study. Writes the report CSV to `--out` when set and prints
/// the error table with the fitted order.
pub fn cmd_converge(
    registry: &IntegratorRegistry,
    s: &Settings,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let spec = RunSpec::from_settings(s)?;
    let integrator = lookup(registry, &spec.integrator)?;
    let q = quantity(s)?;
    let reference = s.get("reference").unwrap_or("exact");
    let (default_h, default_horizon) = match reference {
        "exact" => (vec![0.4, 0.2, 0.1, 0.05, 0.025], 6.0),
        "matrix" => (vec![0.2, 0.1, 0.05], 30.0),
        other => {
            return Err(CliError::Usage(format!(
                "unknown reference '{other}' (exact or matrix)"
            )))
        }
    };
    let h_values = s.list("h-list")?.unwrap_or(default_h);
    let horizon = s.f64("horizon")?.unwrap_or(default_horizon);
    let oracle_h = s.f64("oracle-h")?.unwrap_or(5e-3);

    let fine = match reference {
        "matrix" => {
            let oracle = lookup(registry, "oracle-matrix")?;
            Some(run_checked(
                oracle,
                &spec,
                &spec.with_step(oracle_h, horizon)?,
            )?)
        }
        _ => None,
    };
    let exact = lookup(registry, "oracle-exact")?;

    let errors: Vec<f64> = h_values
        .par_iter()
        .map(|&h| -> Result<f64, CliError> {
            let config = spec.with_step(h, horizon)?;
            let traj = run_checked(integrator, &spec, &config)?;
            let err = match &fine {
                Some(r) => global_error_of(q, &traj, &Reference::Trajectory(r))?,
                None => {
                    let r = run_checked(exact, &spec, &config)?;
                    global_error_of(q, &traj, &Reference::Trajectory(&r))?
                }
            };
            Ok(err)
        })
        .collect::<Result<_, _>>()?;

    let report: ConvergenceReport = fit_slope(&h_values, &errors)?;
    if let Some(path) = &spec.out {
        write_atomic(path, &report.to_csv())?;
    }
    writeln!(
        out,
        "{} error of {} vs {reference} reference, T = {horizon}",
        q, spec.integrator
    )?;
    writeln!(out, "{report}")?;
    Ok(())
}
