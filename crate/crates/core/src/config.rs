//! Run configuration: a JSON object whose unknown keys are rejected.
//!
//! `tau` and `k` are always derived from `lambda`, `m` and the process
//! scaling. They may be given, but only as a cross-check.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lattice::{InitialCondition, LatticeSpec, ProcessKind, Scaling, RELATION_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Float,
    Integer,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Float => "float",
            Mode::Integer => "integer",
        })
    }
}

/// A configuration problem, located by the path of the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: ProcessKind,
    #[serde(rename = "N")]
    n_sites: usize,
    lambda: f64,
    m: Option<f64>,
    scaling: Option<Scaling>,
    k: Option<f64>,
    tau: Option<f64>,
    initial: Option<InitialCondition>,
    steps: Option<u64>,
    #[serde(rename = "T")]
    horizon: Option<f64>,
    mode: Option<Mode>,
    cadence: Option<u64>,
    lambda_list: Option<Vec<f64>>,
    length: Option<f64>,
    q_list: Option<Vec<f64>>,
}

/// Validated configuration with every derived quantity resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: ProcessKind,
    pub spec: LatticeSpec,
    pub initial: InitialCondition,
    /// Step count, from `steps` or from `T / tau`. `None` if neither was given.
    pub steps: Option<u64>,
    pub mode: Mode,
    pub cadence: u64,
    /// Resolutions for `converge`; defaults to four dyadic halvings of `lambda`.
    pub lambda_list: Vec<f64>,
    /// Ring length for `converge`; defaults to `N * lambda`.
    pub length: f64,
    /// Modes for `dispersion`; defaults to every nonnegative lattice mode.
    pub q_list: Vec<f64>,
}

impl RunConfig {
    /// Physical horizon `steps * tau`.
    pub fn horizon(&self) -> Option<f64> {
        self.steps.map(|n| n as f64 * self.spec.tau)
    }

    pub fn require_steps(&self) -> Result<u64, ConfigError> {
        self.steps.ok_or_else(|| ConfigError::new("steps", "one of steps or T is required for this command"))
    }
}

fn relatively_equal(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs());
    scale == 0.0 || (a - b).abs() <= RELATION_TOLERANCE * scale
}

fn spec_error(path: &str, err: Error) -> ConfigError {
    match err {
        Error::InvalidSpec(msg) | Error::InvalidInitial(msg) => ConfigError::new(path, msg),
        other => ConfigError::new(path, other.to_string()),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        ConfigError::new(path, e.into_inner().to_string())
    })?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let kind = raw.kind;
    if raw.n_sites < 4 || raw.n_sites % 2 != 0 {
        return Err(ConfigError::new("N", format!("must be even and >= 4, got {}", raw.n_sites)));
    }
    if !(raw.lambda > 0.0 && raw.lambda.is_finite()) {
        return Err(ConfigError::new("lambda", format!("must be positive and finite, got {}", raw.lambda)));
    }
    let mass = match (kind, raw.m) {
        (ProcessKind::Photon, None) => 0.0,
        (ProcessKind::Photon, Some(m)) if m != 0.0 => {
            return Err(ConfigError::new("m", format!("the photon process is massless, got m = {m}")))
        }
        (_, None) => return Err(ConfigError::new("m", format!("required for the {kind} process"))),
        (_, Some(m)) => m,
    };
    if !(mass >= 0.0 && mass.is_finite()) {
        return Err(ConfigError::new("m", format!("must be >= 0, got {mass}")));
    }
    if let Some(scaling) = raw.scaling {
        if scaling != kind.scaling() {
            return Err(ConfigError::new(
                "scaling",
                format!("the {kind} process uses {} scaling, got {scaling}", kind.scaling()),
            ));
        }
    }
    let spec = LatticeSpec::for_process(kind, raw.n_sites, raw.lambda, mass).map_err(|e| spec_error("m", e))?;

    if let Some(tau) = raw.tau {
        if !relatively_equal(tau, spec.tau) {
            let relation = match spec.scaling {
                Scaling::Diffusive => "tau != lambda^2",
                Scaling::Ballistic => "tau != lambda",
            };
            return Err(ConfigError::new(
                "tau",
                format!("{relation}: derived tau = {}, got {tau} (tau is derived, never read)", spec.tau),
            ));
        }
    }
    if let Some(k) = raw.k {
        if !relatively_equal(k, spec.k) {
            let relation = kind.coupling_relation().replacen(" = ", " != ", 1);
            return Err(ConfigError::new(
                "k",
                format!("{relation}: derived k = {}, got {k} (k is derived, never read)", spec.k),
            ));
        }
    }

    let mode = raw.mode.unwrap_or_default();
    if mode == Mode::Integer && spec.k.fract() != 0.0 {
        return Err(ConfigError::new(
            "mode",
            format!("integer mode requires integer k, but {} gives k = {}", kind.coupling_relation(), spec.k),
        ));
    }

    let steps = match (raw.steps, raw.horizon) {
        (Some(_), Some(_)) => return Err(ConfigError::new("T", "give exactly one of steps or T")),
        (Some(n), None) => Some(n),
        (None, Some(t)) => {
            let n = t / spec.tau;
            let rounded = n.round();
            if !(t >= 0.0) || (n - rounded).abs() > 1e-9 * rounded.max(1.0) {
                return Err(ConfigError::new(
                    "T",
                    format!("must be a nonnegative multiple of tau = {}, got {t}", spec.tau),
                ));
            }
            Some(rounded as u64)
        }
        (None, None) => None,
    };

    let cadence = raw.cadence.unwrap_or(1);
    if cadence == 0 {
        return Err(ConfigError::new("cadence", "must be >= 1"));
    }

    let initial = raw.initial.unwrap_or(InitialCondition::DeltaPair { site: raw.n_sites / 2 });
    if let InitialCondition::DeltaPair { site } = initial {
        if site >= raw.n_sites {
            return Err(ConfigError::new(
                "initial.site",
                format!("site {site} out of range for {} sites", raw.n_sites),
            ));
        }
    }

    let length = raw.length.unwrap_or(spec.length());
    if !(length > 0.0 && length.is_finite()) {
        return Err(ConfigError::new("length", format!("must be positive, got {length}")));
    }
    let lambda_list = raw
        .lambda_list
        .unwrap_or_else(|| (0..4).map(|i| raw.lambda / f64::from(1u32 << i)).collect());
    for (i, &l) in lambda_list.iter().enumerate() {
        if !(l > 0.0 && l.is_finite()) {
            return Err(ConfigError::new(format!("lambda_list[{i}]"), format!("must be positive, got {l}")));
        }
    }

    let q_list = match raw.q_list {
        Some(qs) => {
            for (i, &q) in qs.iter().enumerate() {
                spec.mode_index(q).map_err(|e| spec_error(&format!("q_list[{i}]"), e))?;
            }
            qs
        }
        None => crate::analysis::spectral::nonnegative_modes(&spec),
    };

    Ok(RunConfig { kind, spec, initial, steps, mode, cadence, lambda_list, length, q_list })
}
