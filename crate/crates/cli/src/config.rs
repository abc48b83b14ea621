//! Flat `key = value` run configuration.
//!
//! Blank lines and everything after `#` are ignored. Keys may appear once.
//! Unknown keys are rejected so that a misspelled physics parameter can
//! never fall back to a default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use qlight::{BranchFilter, Scenario, SystemParams, TrajectoryConfig};

/// Keys without a default.
pub const REQUIRED_KEYS: [&str; 9] = [
    "omega0",
    "omega1",
    "v0",
    "gamma_r",
    "gamma_nr",
    "gamma_perp",
    "gamma_u",
    "pump_r",
    "omega_l_rabi",
];

pub const OPTIONAL_KEYS: [&str; 17] = [
    "scenario",
    "unit_scale",
    "unit_name",
    "omega_min",
    "omega_max",
    "omega_steps",
    "coupling_ratios",
    "tau_max",
    "tau_steps",
    "bins",
    "duration",
    "n_trajectories",
    "master_seed",
    "branch",
    "window",
    "write_streams",
    "output",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    Io { path: String, reason: String },
    Syntax { line: usize, reason: String },
    Unknown { key: String, line: usize },
    Duplicate { key: String, line: usize },
    Missing(Vec<String>),
    Invalid { key: String, reason: String },
}

impl ConfigError {
    fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, reason } => write!(f, "cannot read config `{path}`: {reason}"),
            ConfigError::Syntax { line, reason } => write!(f, "config line {line}: {reason}"),
            ConfigError::Unknown { key, line } => {
                write!(f, "config line {line}: unknown key `{key}`")
            }
            ConfigError::Duplicate { key, line } => {
                write!(f, "config line {line}: key `{key}` given more than once")
            }
            ConfigError::Missing(keys) => write!(f, "missing required keys: {}", keys.join(", ")),
            ConfigError::Invalid { key, reason } => {
                write!(f, "invalid value for `{key}`: {reason}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Everything a command needs, validated.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    /// Physical frequency per internal unit, for reporting only.
    pub unit_scale: f64,
    pub unit_name: String,
    /// Spectrum abscissa `(ω − ω_m)/Γ⊥`.
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_steps: usize,
    /// `V0/Δ` values of the spectrum sweep.
    pub coupling_ratios: Vec<f64>,
    /// Delay range in units of `1/Γ∥`.
    pub tau_max: f64,
    pub tau_steps: usize,
    /// Coincidence histogram bins spanning `[0, tau_max]`.
    pub bins: usize,
    pub trajectory: TrajectoryConfig,
    /// Fano counting window in units of `1/Γ∥`.
    pub window: f64,
    pub write_streams: bool,
    /// Output directory from the file; `--out` takes precedence.
    pub output: Option<String>,
}

impl RunConfig {
    /// Delay grid in internal time units.
    pub fn tau_grid(&self) -> Vec<f64> {
        let gpar = self.params.gamma_par();
        linspace(0.0, self.tau_max, self.tau_steps)
            .into_iter()
            .map(|x| x / gpar)
            .collect()
    }

    /// Abscissa samples `(ω − ω_m)/Γ⊥`.
    pub fn omega_axis(&self) -> Vec<f64> {
        linspace(self.omega_min, self.omega_max, self.omega_steps)
    }

    /// Histogram bin edges in internal time units.
    pub fn bin_edges(&self) -> Vec<f64> {
        let gpar = self.params.gamma_par();
        linspace(0.0, self.tau_max, self.bins + 1)
            .into_iter()
            .map(|x| x / gpar)
            .collect()
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|k| if k + 1 == n { b } else { a + k as f64 * h })
        .collect()
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: BTreeMap<String, String> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: line_no,
                reason: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        if !REQUIRED_KEYS.contains(&key) && !OPTIONAL_KEYS.contains(&key) {
            return Err(ConfigError::Unknown {
                key: key.to_string(),
                line: line_no,
            });
        }
        if entries
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(ConfigError::Duplicate {
                key: key.to_string(),
                line: line_no,
            });
        }
    }

    let missing: Vec<String> = REQUIRED_KEYS
        .iter()
        .filter(|k| !entries.contains_key(**k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::Missing(missing));
    }

    let e = Entries(&entries);
    let params = SystemParams {
        omega0: e.req("omega0")?,
        omega1: e.req("omega1")?,
        v0: e.req("v0")?,
        gamma_r: e.req("gamma_r")?,
        gamma_nr: e.req("gamma_nr")?,
        gamma_perp: e.req("gamma_perp")?,
        gamma_u: e.req("gamma_u")?,
        pump_r: e.req("pump_r")?,
        omega_l_rabi: e.req("omega_l_rabi")?,
        scenario: e.opt("scenario", Scenario::NonResonant)?,
    };
    params.validate().map_err(|err| match err {
        qlight::Error::InvalidParameter { name, reason } => {
            ConfigError::Invalid { key: name, reason }
        }
        other => ConfigError::invalid("params", other.to_string()),
    })?;

    let coupling_ratios = match entries.get("coupling_ratios") {
        None => vec![0.5, 1.0, 2.0],
        Some(v) => v
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    ConfigError::invalid(
                        "coupling_ratios",
                        format!("`{}` is not a number", s.trim()),
                    )
                })
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    if coupling_ratios.is_empty()
        || coupling_ratios
            .iter()
            .any(|r| !(*r > 0.0) || !r.is_finite())
    {
        return Err(ConfigError::invalid(
            "coupling_ratios",
            "values must be finite and > 0",
        ));
    }

    let branch_filter = match entries.get("branch") {
        None => BranchFilter::Both,
        Some(v) => v.parse::<BranchFilter>().map_err(|_| {
            ConfigError::invalid("branch", format!("expected minus, plus or both, got `{v}`"))
        })?,
    };

    let cfg = RunConfig {
        params,
        unit_scale: e.opt("unit_scale", 1.0)?,
        unit_name: entries
            .get("unit_name")
            .cloned()
            .unwrap_or_else(|| "THz".into()),
        omega_min: e.opt("omega_min", -10.0)?,
        omega_max: e.opt("omega_max", 10.0)?,
        omega_steps: e.opt("omega_steps", 2001)?,
        coupling_ratios,
        tau_max: e.opt("tau_max", 500.0)?,
        tau_steps: e.opt("tau_steps", 1001)?,
        bins: e.opt("bins", 20)?,
        trajectory: TrajectoryConfig {
            duration: e.opt("duration", 1e6)?,
            n_trajectories: e.opt("n_trajectories", 4)?,
            master_seed: e.opt("master_seed", 0)?,
            branch_filter,
        },
        window: e.opt("window", 100.0)?,
        write_streams: e.opt("write_streams", true)?,
        output: entries.get("output").cloned(),
    };
    check_grids(&cfg)?;
    Ok(cfg)
}

fn check_grids(c: &RunConfig) -> Result<(), ConfigError> {
    let positive = [
        ("unit_scale", c.unit_scale),
        ("tau_max", c.tau_max),
        ("duration", c.trajectory.duration),
        ("window", c.window),
    ];
    for (key, v) in positive {
        if !(v > 0.0) || !v.is_finite() {
            return Err(ConfigError::invalid(
                key,
                format!("must be finite and > 0, got {v}"),
            ));
        }
    }
    if !c.omega_min.is_finite() || !c.omega_max.is_finite() || c.omega_max <= c.omega_min {
        return Err(ConfigError::invalid(
            "omega_max",
            "must be finite and above omega_min",
        ));
    }
    for (key, n, min) in [
        ("omega_steps", c.omega_steps, 2),
        ("tau_steps", c.tau_steps, 2),
        ("bins", c.bins, 1),
        ("n_trajectories", c.trajectory.n_trajectories, 1),
    ] {
        if n < min {
            return Err(ConfigError::invalid(
                key,
                format!("must be >= {min}, got {n}"),
            ));
        }
    }
    Ok(())
}

struct Entries<'a>(&'a BTreeMap<String, String>);

impl Entries<'_> {
    fn req<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let v = &self.0[key];
        v.parse()
            .map_err(|_| ConfigError::invalid(key, format!("cannot parse `{v}`")))
    }

    fn opt<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(_) => self.req(key),
        }
    }
}
