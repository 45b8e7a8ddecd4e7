use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DVector;

use crate::integrators::{IntegratorConfig, DEFAULT_NEWTON_MAX_ITER, DEFAULT_NEWTON_TOL};
use crate::models::{ExternalForce, ForcePiece, MechModel, Quadratic};
use crate::state::State;

use super::CliError;

/// Keys accepted on the command line and in config files.
pub const KNOWN_KEYS: &[&str] = &[
    "integrator",
    "model",
    "alpha",
    "kappa",
    "rho",
    "c",
    "mass",
    "h",
    "steps",
    "horizon",
    "x0",
    "p0",
    "force",
    "out",
    "newton-tol",
    "newton-max-iter",
    "reference",
    "h-list",
    "oracle-h",
    "quantity",
    "against",
];

/// Flat `key = value` settings. Flags are layered over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_config(text: &str) -> Result<Self, CliError> {
        let mut settings = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key = value", lineno + 1))
            })?;
            settings.set(key.trim(), value.trim())?;
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_config(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.replace('_', "-");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("unknown setting '{key}'")));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("invalid value for --{key}: '{v}'")))
            })
            .transpose()
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.get(key).map(|v| parse_list(key, v)).transpose()
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(CliError::Usage(format!("invalid value for --{key}: '{v}'"))),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    let items: Vec<f64> = v
        .split(',')
        .map(|s| parse_f64(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(CliError::Usage(format!("--{key} is empty")));
    }
    Ok(items)
}

/// Built-in model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Linearly damped harmonic oscillator.
    Oscillator,
    /// `x'' + x + D^{3/2} x = F` with a unit pulse of height 8 on `[0, 1]`.
    FractionalTest,
    /// Quadratic potential with user stiffness, undamped and at rest by default.
    Quadratic,
}

struct ModelDefaults {
    mass: f64,
    c: f64,
    rho: f64,
    x0: f64,
    p0: f64,
    alpha: f64,
    h: f64,
    horizon: f64,
    force: &'static str,
}

impl ModelKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "oscillator" => Ok(Self::Oscillator),
            "fractional-test" => Ok(Self::FractionalTest),
            "quadratic" => Ok(Self::Quadratic),
            other => Err(CliError::Usage(format!(
                "unknown model '{other}' (expected oscillator, fractional-test or quadratic)"
            ))),
        }
    }

    fn defaults(self) -> ModelDefaults {
        match self {
            Self::Oscillator => ModelDefaults {
                mass: 1.0,
                c: 1.0,
                rho: 0.2,
                x0: 1.0,
                p0: 0.5,
                alpha: 0.5,
                h: 0.2,
                horizon: 30.0,
                force: "",
            },
            Self::FractionalTest => ModelDefaults {
                mass: 1.0,
                c: 1.0,
                rho: 1.0,
                x0: 0.0,
                p0: 0.0,
                alpha: 0.75,
                h: 0.05,
                horizon: 30.0,
                force: "0:1:8",
            },
            Self::Quadratic => ModelDefaults {
                mass: 1.0,
                c: 1.0,
                rho: 0.0,
                x0: 0.0,
                p0: 0.0,
                alpha: 0.5,
                h: 0.1,
                horizon: 10.0,
                force: "",
            },
        }
    }
}

/// Fully resolved run: integrator tag, model, and step configuration.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub integrator: String,
    pub model_kind: ModelKind,
    pub model: MechModel,
    pub config: IntegratorConfig,
    pub horizon: f64,
    pub out: Option<PathBuf>,
}

impl RunSpec {
    pub fn from_settings(s: &Settings) -> Result<Self, CliError> {
        let model_kind = ModelKind::parse(s.get("model").unwrap_or("oscillator"))?;
        let d = model_kind.defaults();

        let lists = [
            ("mass", s.list("mass")?),
            ("c", s.list("c")?),
            ("rho", s.list("rho")?),
            ("x0", s.list("x0")?),
            ("p0", s.list("p0")?),
        ];
        let dim = lists
            .iter()
            .filter_map(|(_, v)| v.as_ref().map(Vec::len))
            .max()
            .unwrap_or(1);
        let vector = |key: &str, default: f64| -> Result<State, CliError> {
            let given = lists
                .iter()
                .find(|(k, _)| *k == key)
                .and_then(|(_, v)| v.as_ref());
            match given {
                None => Ok(DVector::from_element(dim, default)),
                Some(v) if v.len() == 1 => Ok(DVector::from_element(dim, v[0])),
                Some(v) if v.len() == dim => Ok(DVector::from_vec(v.clone())),
                Some(v) => Err(CliError::Usage(format!(
                    "--{key} has {} components, expected 1 or {dim}",
                    v.len()
                ))),
            }
        };

        let mass = vector("mass", d.mass)?;
        let stiffness = vector("c", d.c)?;
        let rho = vector("rho", d.rho)?;
        let x0 = vector("x0", d.x0)?;
        let p0 = vector("p0", d.p0)?;

        let mut model = MechModel::new(mass, rho, Arc::new(Quadratic::new(stiffness)?))?;
        if let Some(force) = parse_force(s.get("force").unwrap_or(d.force), dim)? {
            model = model.with_force(force)?;
        }

        let h = s.f64("h")?.unwrap_or(d.h);
        let horizon = s.f64("horizon")?.unwrap_or(d.horizon);
        let n_steps = match s.usize("steps")? {
            Some(n) => n,
            None => steps_for(horizon, h)?,
        };
        let config = IntegratorConfig::new(h, n_steps, x0, p0)
            .with_alpha(s.f64("alpha")?.unwrap_or(d.alpha))
            .with_kappa(s.f64("kappa")?.unwrap_or(0.5))
            .with_newton(
                s.f64("newton-tol")?.unwrap_or(DEFAULT_NEWTON_TOL),
                s.usize("newton-max-iter")?
                    .unwrap_or(DEFAULT_NEWTON_MAX_ITER),
            );
        config.validate()?;

        Ok(Self {
            integrator: s.get("integrator").unwrap_or("fvi").to_string(),
            model_kind,
            model,
            config,
            horizon,
            out: s.get("out").map(PathBuf::from),
        })
    }

    /// Same model and initial data on another step, covering `horizon`.
    pub fn with_step(&self, h: f64, horizon: f64) -> Result<IntegratorConfig, CliError> {
        let mut config = self.config.clone();
        config.h = h;
        config.n_steps = steps_for(horizon, h)?;
        Ok(config)
    }
}

/// `horizon / h`, which must be a whole number of at least 2.
pub fn steps_for(horizon: f64, h: f64) -> Result<usize, CliError> {
    if !(h > 0.0) || !(horizon > 0.0) {
        return Err(CliError::Usage(format!(
            "step {h} and horizon {horizon} must be positive"
        )));
    }
    let ratio = horizon / h;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * ratio || n < 2.0 {
        return Err(CliError::Usage(format!(
            "horizon {horizon} is not a whole number (>= 2) of steps of {h}"
        )));
    }
    Ok(n as usize)
}

/// `t0:t1:value;...`; `value` may be a comma list with one entry per component.
/// An empty string or `none` means no force.
pub fn parse_force(table: &str, dim: usize) -> Result<Option<ExternalForce>, CliError> {
    let table = table.trim();
    if table.is_empty() || table == "none" {
        return Ok(None);
    }
    let mut pieces = Vec::new();
    for entry in table.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        let parts: Vec<&str> = entry.split(':').collect();
        let [start, end, value] = parts[..] else {
            return Err(CliError::Usage(format!(
                "force entry '{entry}' is not t0:t1:value"
            )));
        };
        let value = parse_list("force", value)?;
        let value = match value.len() {
            1 => DVector::from_element(dim, value[0]),
            n if n == dim => DVector::from_vec(value),
            n => {
                return Err(CliError::Usage(format!(
                    "force value has {n} components, expected 1 or {dim}"
                )))
            }
        };
        pieces.push(ForcePiece {
            start: parse_f64("force", start)?,
            end: parse_f64("force", end)?,
            value,
        });
    }
    Ok(Some(ExternalForce::new(pieces)?))
}
