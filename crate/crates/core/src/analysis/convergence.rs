//! Lattice-vs-continuum error at a fixed physical time over a ladder of
//! resolutions, and the fitted convergence order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{make_state, InitialCondition, LatticeSpec, ProcessKind, ProcessState};
use crate::oracle::{self, ContinuumSolution, Profile};
use crate::processes;

/// Errors below this are roundoff and excluded from the fit.
pub const EXACT_FLOOR: f64 = 1e-13;
/// A study whose every error is at most this is reported as exact.
pub const EXACT_THRESHOLD: f64 = 1e-12;
/// Largest admissible accumulated amplification of the Schrödinger band-edge mode
/// (roundoff may grow to at most this many machine epsilons).
pub const GROWTH_BOUND: f64 = 1e6;

/// `sqrt(lambda * sum_s |field(s) - solution(s lambda, t)|^2)` over all components.
pub fn l2_error(state: &ProcessState<f64>, solution: &ContinuumSolution, time: f64) -> Result<f64> {
    if state.kind != solution.kind() {
        return Err(Error::KindMismatch { expected: solution.kind().to_string(), found: state.kind.to_string() });
    }
    let reached = state.time();
    if (reached - time).abs() > 1e-9 * time.abs().max(state.spec.tau) {
        return Err(Error::InvalidSpec(format!(
            "state is at t = {reached} (step {}), error requested at t = {time}",
            state.step_index
        )));
    }
    let view = state.complex_view();
    let exact = solution.sample(&state.spec, time);
    let sum: f64 = view
        .components
        .iter()
        .zip(&exact)
        .flat_map(|(lattice, oracle)| lattice.iter().zip(oracle).map(|(a, b)| (a - b).norm_sqr()))
        .sum();
    Ok((state.spec.lambda * sum).sqrt())
}

/// Continuum solution matching an initial condition on a ring of length `period`.
pub fn solution_for(
    kind: ProcessKind,
    mass: f64,
    ic: &InitialCondition,
    period: f64,
) -> Result<ContinuumSolution> {
    match ic {
        InitialCondition::PlaneWave { momentum, branch } => oracle::plane_wave(kind, mass, *momentum, *branch),
        InitialCondition::Gaussian { center, width, momentum } => match kind {
            ProcessKind::Schrodinger => oracle::schrodinger_gaussian(mass, *center, *width, *momentum, period),
            ProcessKind::Photon => {
                let profile = Profile::Gaussian { center: *center, width: *width, momentum: *momentum, period };
                Ok(oracle::photon_solution(profile.clone(), profile))
            }
            _ => Err(Error::InvalidInitial(format!("no closed-form {kind} solution for a gaussian packet"))),
        },
        _ => Err(Error::InvalidInitial(
            "convergence studies need a plane wave or gaussian initial condition".to_string(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionResult {
    pub lambda: f64,
    pub n_sites: usize,
    pub steps: u64,
    pub error: f64,
    /// Accumulated amplification of the fastest-growing lattice mode over the run.
    pub amplification: f64,
    pub used_in_fit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceOrder {
    /// Every error is at roundoff level.
    Exact,
    Fitted { order: f64, residual: f64 },
}

impl ConvergenceOrder {
    pub fn value(&self) -> Option<f64> {
        match self {
            ConvergenceOrder::Exact => None,
            ConvergenceOrder::Fitted { order, .. } => Some(*order),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ConvergenceOrder::Exact)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub kind: ProcessKind,
    pub horizon: f64,
    pub results: Vec<ResolutionResult>,
    pub order: ConvergenceOrder,
}

impl ConvergenceReport {
    pub fn lambdas(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.lambda).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.error).collect()
    }
}

/// Least-squares slope of `ln y` against `ln x` and the RMS residual of the fit.
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::InsufficientData(format!("a fit needs >= 3 points, got {}", xs.len().min(ys.len()))));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InsufficientData("log fit requires positive finite values".to_string()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("fit abscissae are all equal".to_string()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok((slope, rms))
}

/// Largest per-step amplification among the lattice modes of `kind`.
pub fn worst_mode_growth(kind: ProcessKind, spec: &LatticeSpec) -> f64 {
    match kind {
        ProcessKind::Schrodinger => (1.0 + 16.0 * spec.k * spec.k).sqrt(),
        ProcessKind::Dirac => (1.0 + spec.k * spec.k).sqrt(),
        ProcessKind::KleinGordon => {
            // Band edge q lambda = pi: roots of z^2 + (2 + k) z + 1.
            let b = 2.0 + spec.k;
            (b + (b * b - 4.0).max(0.0).sqrt()) / 2.0
        }
        ProcessKind::Photon => 1.0,
    }
}

fn step_count(horizon: f64, tau: f64) -> Result<u64> {
    let steps = horizon / tau;
    let rounded = steps.round();
    if !(rounded >= 0.0) || (steps - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(Error::InvalidSpec(format!(
            "horizon {horizon} is not an integer number of steps of tau = {tau} ({steps})"
        )));
    }
    Ok(rounded as u64)
}

fn ring_size(length: f64, lambda: f64) -> Result<usize> {
    let n = length / lambda;
    let rounded = n.round();
    if !(rounded >= 4.0) || (n - rounded).abs() > 1e-9 * rounded {
        return Err(Error::InvalidSpec(format!("length {length} is not an integer number of sites of {lambda}")));
    }
    Ok(rounded as usize)
}

/// Runs the process at every `lambda` on a ring of fixed physical `length`
/// and records the L2 error against the continuum solution at `horizon`.
///
/// Schrödinger resolutions whose band-edge amplification exceeds
/// [`GROWTH_BOUND`] are run and reported but left out of the fit.
pub fn convergence_study(
    kind: ProcessKind,
    mass: f64,
    length: f64,
    ic: &InitialCondition,
    lambdas: &[f64],
    horizon: f64,
) -> Result<ConvergenceReport> {
    if lambdas.len() < 3 {
        return Err(Error::InsufficientData(format!("need >= 3 resolutions, got {}", lambdas.len())));
    }
    let solution = solution_for(kind, mass, ic, length)?;
    // Validate every resolution before spending time on any run.
    let setups = lambdas
        .iter()
        .map(|&lambda| {
            let spec = LatticeSpec::for_process(kind, ring_size(length, lambda)?, lambda, mass)?;
            Ok((spec, step_count(horizon, spec.tau)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let results = setups
        .par_iter()
        .map(|&(spec, steps)| -> Result<ResolutionResult> {
            let mut state: ProcessState<f64> = make_state(spec, kind, ic)?;
            processes::advance(&mut state, steps)?;
            let error = l2_error(&state, &solution, horizon)?;
            let amplification = worst_mode_growth(kind, &spec).powf(steps as f64);
            let within_bound = kind != ProcessKind::Schrodinger || amplification < GROWTH_BOUND;
            Ok(ResolutionResult {
                lambda: spec.lambda,
                n_sites: spec.n_sites,
                steps,
                error,
                amplification,
                used_in_fit: within_bound && error >= EXACT_FLOOR,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let order = if results.iter().all(|r| r.error <= EXACT_THRESHOLD) {
        ConvergenceOrder::Exact
    } else {
        let used: Vec<&ResolutionResult> = results.iter().filter(|r| r.used_in_fit).collect();
        let xs: Vec<f64> = used.iter().map(|r| r.lambda).collect();
        let ys: Vec<f64> = used.iter().map(|r| r.error).collect();
        let (order, residual) = fit_log_slope(&xs, &ys)?;
        ConvergenceOrder::Fitted { order, residual }
    };
    Ok(ConvergenceReport { kind, horizon, results, order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::PlaneWaveBranch;

    #[test]
    fn fit_recovers_power_law() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        let (slope, residual) = fit_log_slope(&xs, &ys).unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert!(residual < 1e-12);
        assert!(fit_log_slope(&xs[..2], &ys[..2]).is_err());
    }

    #[test]
    fn sampled_state_has_zero_error() {
        let spec = LatticeSpec::for_process(ProcessKind::Dirac, 64, 0.1, 1.0).unwrap();
        let ic = InitialCondition::PlaneWave { momentum: spec.mode_momentum(3), branch: PlaneWaveBranch::Positive };
        let state: ProcessState<f64> = make_state(spec, ProcessKind::Dirac, &ic).unwrap();
        let solution = solution_for(ProcessKind::Dirac, 1.0, &ic, spec.length()).unwrap();
        assert!(l2_error(&state, &solution, 0.0).unwrap() <= 1e-14);
        assert!(l2_error(&state, &solution, 0.5).is_err());
        let wrong = oracle::schrodinger_solution(1.0, 0.0).unwrap();
        assert!(matches!(l2_error(&state, &wrong, 0.0), Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn photon_study_is_exact() {
        let length = 6.4;
        let ic = InitialCondition::Gaussian { center: 3.2, width: 0.4, momentum: 2.0 * std::f64::consts::PI * 2.0 / length };
        let report = convergence_study(ProcessKind::Photon, 0.0, length, &ic, &[0.1, 0.05, 0.025], 1.6).unwrap();
        assert!(report.order.is_exact(), "{report:?}");
    }

    #[test]
    fn rejects_non_integer_steps() {
        let ic = InitialCondition::PlaneWave { momentum: 0.0, branch: PlaneWaveBranch::Right };
        let err = convergence_study(ProcessKind::Photon, 0.0, 1.0, &ic, &[0.1, 0.05, 0.025], 0.0333).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
    }

    #[test]
    fn schrodinger_error_grows_smoothly() {
        let spec = LatticeSpec::for_process(ProcessKind::Schrodinger, 64, 0.1, 4.0).unwrap();
        let ic = InitialCondition::PlaneWave { momentum: spec.mode_momentum(2), branch: PlaneWaveBranch::Positive };
        let solution = solution_for(ProcessKind::Schrodinger, 4.0, &ic, spec.length()).unwrap();
        let mut state: ProcessState<f64> = make_state(spec, ProcessKind::Schrodinger, &ic).unwrap();
        let mut last = 0.0;
        for _ in 0..200 {
            processes::step(&mut state).unwrap();
            let err = l2_error(&state, &solution, state.time()).unwrap();
            assert!(err > last);
            last = err;
        }
    }
}
