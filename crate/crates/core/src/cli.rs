//! Batch front end: `vpsim simulate|converge|dispersion|census --config <path> --out <dir>`.
//!
//! Every command writes `summary.json` plus its CSV into `--out`. Failures
//! print one JSON error record on stderr and exit with 2 (config), 3
//! (numeric) or 4 (I/O).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::convergence::{convergence_study, ResolutionResult};
use crate::analysis::spectral::lattice_dispersion;
use crate::config::{parse_config, ConfigError, Mode, RunConfig};
use crate::error::Error;
use crate::lattice::{make_state, Count, InitialCondition, LatticeSpec, PlaneWaveBranch, ProcessKind, ProcessState};
use crate::processes::{run_with, StepReport};

#[derive(Debug, Parser)]
#[command(name = "vpsim", version, about = "Virtual-particle lattice processes and their continuum limits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run a process and write the trajectory.
    Simulate(RunArgs),
    /// L2 error against the continuum solution over a list of resolutions.
    Converge(RunArgs),
    /// Lattice versus continuum dispersion per mode.
    Dispersion(RunArgs),
    /// Particle census after the configured number of steps.
    Census(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Float,
    Integer,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Float => Mode::Float,
            ModeArg::Integer => Mode::Integer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config's mode.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Overrides the config's observer cadence.
    #[arg(long)]
    pub cadence: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Config,
    Numeric,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Numeric => 3,
            ErrorKind::Io => 4,
        }
    }
}

/// Machine-readable failure, printed as `{"error": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub message: String,
}

impl CliError {
    fn new(kind: ErrorKind, path: Option<String>, message: impl Into<String>) -> Self {
        CliError { kind, exit_code: kind.exit_code(), path, message: message.into() }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::new(ErrorKind::Io, Some(path.display().to_string()), err.to_string())
    }

    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a CliError,
        }
        serde_json::to_string(&Record { error: self }).expect("error record serializes")
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let path = if e.path.is_empty() { None } else { Some(e.path) };
        CliError::new(ErrorKind::Config, path, e.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::InvalidSpec(_)
            | Error::InvalidInitial(_)
            | Error::NonLatticeMomentum { .. }
            | Error::SpeciesNotPresent { .. }
            | Error::SiteOutOfRange { .. }
            | Error::KindMismatch { .. } => ErrorKind::Config,
            Error::Overflow { .. } | Error::InsufficientData(_) | Error::IllDefined(_) => ErrorKind::Numeric,
        };
        CliError::new(kind, None, e.to_string())
    }
}

/// A count that keeps its integer type in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesTally {
    pub species: String,
    pub sum: Number,
    pub census: Number,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderField {
    /// Always `"exact"`.
    Label(String),
    Value(f64),
}

/// Contents of `summary.json`. Fields not produced by a command are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub command: String,
    pub kind: ProcessKind,
    pub mode: Mode,
    /// Resolved lattice: N, lambda, tau, scaling, k, m.
    pub spec: LatticeSpec,
    pub initial: InitialCondition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cadence: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub census: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupied_sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub species: Option<Vec<SpeciesTally>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolutions: Option<Vec<ResolutionResult>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_relative_deviation: Option<f64>,
    pub files: Vec<String>,
}

impl Summary {
    fn new(command: &str, cfg: &RunConfig) -> Self {
        Summary {
            command: command.to_string(),
            kind: cfg.kind,
            mode: cfg.mode,
            spec: cfg.spec,
            initial: cfg.initial.clone(),
            steps: None,
            cadence: None,
            frames: None,
            rows: None,
            step: None,
            census: None,
            occupied_sites: None,
            species: None,
            horizon: None,
            length: None,
            order: None,
            fit_residual: None,
            resolutions: None,
            max_relative_deviation: None,
            files: Vec::new(),
        }
    }
}

/// Scalar formatting for CSV cells and JSON counts.
trait Emit: Count {
    fn cell(self) -> String;
    fn number(self) -> Number;
}

impl Emit for f64 {
    // Debug formatting is the shortest string that parses back to the same value.
    fn cell(self) -> String {
        format!("{self:?}")
    }
    fn number(self) -> Number {
        Number::Float(self)
    }
}

impl Emit for i64 {
    fn cell(self) -> String {
        self.to_string()
    }
    fn number(self) -> Number {
        Number::Int(self)
    }
}

fn branch_name(b: PlaneWaveBranch) -> &'static str {
    match b {
        PlaneWaveBranch::Positive => "positive",
        PlaneWaveBranch::Negative => "negative",
        PlaneWaveBranch::Right => "right",
        PlaneWaveBranch::Left => "left",
    }
}

fn tallies<T: Emit>(report: &StepReport<T>) -> Vec<SpeciesTally> {
    report
        .sums
        .iter()
        .zip(&report.census)
        .map(|(&(species, sum), &(_, census))| SpeciesTally {
            species: species.to_string(),
            sum: sum.number(),
            census: census.number(),
        })
        .collect()
}

fn check_finite<T: Count>(state: &ProcessState<T>) -> Result<(), CliError> {
    if T::EXACT {
        return Ok(());
    }
    let bad = state.fields.iter().any(|f| f.values.iter().any(|v| !v.to_f64().is_finite()));
    if bad {
        return Err(CliError::new(
            ErrorKind::Numeric,
            None,
            format!("non-finite value in the state after step {}", state.step_index),
        ));
    }
    Ok(())
}

fn write_frame<T: Emit>(csv: &mut String, state: &ProcessState<T>) {
    for s in 0..state.spec.n_sites {
        for field in state.current_fields() {
            let _ = writeln!(csv, "{},{},{},{}", state.step_index, s, field.species, field.values[s].cell());
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}

fn simulate<T: Emit>(cfg: &RunConfig, out: &Path) -> Result<Summary, CliError> {
    let steps = cfg.require_steps()?;
    let mut state: ProcessState<T> = make_state(cfg.spec, cfg.kind, &cfg.initial)?;
    let mut csv = String::from("t,site,species,value\n");
    let mut frames = 1;
    write_frame(&mut csv, &state);
    run_with(&mut state, steps, cfg.cadence, |s| {
        frames += 1;
        write_frame(&mut csv, s);
        Ok(())
    })?;
    check_finite(&state)?;
    write_file(out, "trajectory.csv", &csv)?;

    let report = StepReport::from_state(&state)?;
    let mut summary = Summary::new("simulate", cfg);
    summary.steps = Some(steps);
    summary.cadence = Some(cfg.cadence);
    summary.frames = Some(frames);
    summary.rows = Some(frames * cfg.spec.n_sites * cfg.kind.species().len());
    summary.step = Some(state.step_index);
    summary.census = Some(report.total_census.number());
    summary.occupied_sites = Some(report.occupied_sites);
    summary.species = Some(tallies(&report));
    summary.files = vec!["trajectory.csv".to_string()];
    Ok(summary)
}

fn census<T: Emit>(cfg: &RunConfig) -> Result<Summary, CliError> {
    let steps = cfg.require_steps()?;
    let mut state: ProcessState<T> = make_state(cfg.spec, cfg.kind, &cfg.initial)?;
    crate::processes::advance(&mut state, steps)?;
    check_finite(&state)?;
    let report = StepReport::from_state(&state)?;
    let mut summary = Summary::new("census", cfg);
    summary.steps = Some(steps);
    summary.step = Some(report.step_index);
    summary.census = Some(report.total_census.number());
    summary.occupied_sites = Some(report.occupied_sites);
    summary.species = Some(tallies(&report));
    Ok(summary)
}

fn converge(cfg: &RunConfig, out: &Path) -> Result<Summary, CliError> {
    if cfg.mode == Mode::Integer {
        return Err(ConfigError::new("mode", "converge compares against continuum solutions and runs in float mode").into());
    }
    let steps = cfg.require_steps()?;
    let horizon = steps as f64 * cfg.spec.tau;
    let report = convergence_study(cfg.kind, cfg.spec.mass, cfg.length, &cfg.initial, &cfg.lambda_list, horizon)?;
    let mut csv = String::from("lambda,error\n");
    for r in &report.results {
        let _ = writeln!(csv, "{},{}", r.lambda.cell(), r.error.cell());
    }
    write_file(out, "convergence.csv", &csv)?;

    let mut summary = Summary::new("converge", cfg);
    summary.horizon = Some(horizon);
    summary.length = Some(cfg.length);
    let (order, residual) = match report.order {
        crate::analysis::ConvergenceOrder::Exact => (OrderField::Label("exact".to_string()), None),
        crate::analysis::ConvergenceOrder::Fitted { order, residual } => (OrderField::Value(order), Some(residual)),
    };
    summary.order = Some(order);
    summary.fit_residual = residual;
    summary.resolutions = Some(report.results);
    summary.files = vec!["convergence.csv".to_string()];
    Ok(summary)
}

fn dispersion(cfg: &RunConfig, out: &Path) -> Result<Summary, CliError> {
    let rows = lattice_dispersion(cfg.kind, &cfg.spec, &cfg.q_list)?;
    let mut csv = String::from("q,branch,omega_lattice,growth,omega_continuum,deviation\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.q.cell(),
            branch_name(r.branch),
            r.omega_lattice.cell(),
            r.growth.cell(),
            r.omega_continuum.cell(),
            r.deviation.cell()
        );
    }
    write_file(out, "dispersion.csv", &csv)?;
    let mut summary = Summary::new("dispersion", cfg);
    summary.rows = Some(rows.len());
    summary.max_relative_deviation = Some(rows.iter().map(|r| r.relative_deviation()).fold(0.0, f64::max));
    summary.files = vec!["dispersion.csv".to_string()];
    Ok(summary)
}

/// Runs one command and writes its files. Returns the summary that was written.
pub fn execute(command: &Command) -> Result<Summary, CliError> {
    let (name, args) = match command {
        Command::Simulate(a) => ("simulate", a),
        Command::Converge(a) => ("converge", a),
        Command::Dispersion(a) => ("dispersion", a),
        Command::Census(a) => ("census", a),
    };
    let text = fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let mut cfg = parse_config(&text)?;
    if let Some(mode) = args.mode {
        cfg.mode = mode.into();
        if cfg.mode == Mode::Integer && cfg.spec.k.fract() != 0.0 {
            return Err(ConfigError::new("mode", format!("integer mode requires integer k, got k = {}", cfg.spec.k)).into());
        }
    }
    if let Some(cadence) = args.cadence {
        if cadence == 0 {
            return Err(ConfigError::new("cadence", "must be >= 1").into());
        }
        cfg.cadence = cadence;
    }
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;

    let mut summary = match (name, cfg.mode) {
        ("simulate", Mode::Float) => simulate::<f64>(&cfg, &args.out)?,
        ("simulate", Mode::Integer) => simulate::<i64>(&cfg, &args.out)?,
        ("census", Mode::Float) => census::<f64>(&cfg)?,
        ("census", Mode::Integer) => census::<i64>(&cfg)?,
        ("converge", _) => converge(&cfg, &args.out)?,
        _ => dispersion(&cfg, &args.out)?,
    };
    summary.files.push("summary.json".to_string());
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::new(ErrorKind::Numeric, None, e.to_string()))?;
    json.push('\n');
    write_file(&args.out, "summary.json", &json)?;
    Ok(summary)
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return 0;
            }
            let err = CliError::new(ErrorKind::Config, None, e.to_string().trim_end().to_string());
            eprintln!("{}", err.record());
            return err.exit_code;
        }
    };
    match execute(&cli.command) {
        Ok(_) => 0,
        Err(err) => {
            eprintln!("{}", err.record());
            err.exit_code
        }
    }
}
