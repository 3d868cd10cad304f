//! Central-difference residuals of the 1+1 dimensional vacuum Maxwell equations
//! `d_t E = d_x B`, `d_t B = d_x E` on photon trajectories.

use serde::{Deserialize, Serialize};

use crate::analysis::convergence::{fit_log_slope, ConvergenceOrder, EXACT_FLOOR, EXACT_THRESHOLD};
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, ProcessKind, ProcessState};
use crate::oracle::{maxwell_fields, Profile};
use crate::processes;

/// Residual L2 norms `sqrt(lambda sum_s r_s^2)`, maximized over interior frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxwellResidual {
    /// `D_t E - D_x B`
    pub first: f64,
    /// `D_t B - D_x E`
    pub second: f64,
}

/// Residuals over frames of `(r, l)` recorded every `frame_dt` in time on a
/// ring of spacing `lambda`. Time derivatives use the neighbouring frames.
pub fn maxwell_residual(frames: &[(Vec<f64>, Vec<f64>)], lambda: f64, frame_dt: f64) -> Result<MaxwellResidual> {
    if frames.len() < 3 {
        return Err(Error::InsufficientData(format!("need >= 3 frames, got {}", frames.len())));
    }
    let fields: Vec<(Vec<f64>, Vec<f64>)> = frames.iter().map(|(r, l)| maxwell_fields(r, l)).collect();
    let n = fields[0].0.len();
    let mut worst = MaxwellResidual { first: 0.0, second: 0.0 };
    for j in 1..fields.len() - 1 {
        let (e_prev, b_prev) = &fields[j - 1];
        let (e, b) = &fields[j];
        let (e_next, b_next) = &fields[j + 1];
        let (mut first, mut second) = (0.0, 0.0);
        for s in 0..n {
            let (l, r) = ((s + n - 1) % n, (s + 1) % n);
            let dt_e = (e_next[s] - e_prev[s]) / (2.0 * frame_dt);
            let dt_b = (b_next[s] - b_prev[s]) / (2.0 * frame_dt);
            let dx_e = (e[r] - e[l]) / (2.0 * lambda);
            let dx_b = (b[r] - b[l]) / (2.0 * lambda);
            first += (dt_e - dx_b).powi(2);
            second += (dt_b - dx_e).powi(2);
        }
        worst.first = worst.first.max((lambda * first).sqrt());
        worst.second = worst.second.max((lambda * second).sqrt());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxwellStudy {
    pub lambdas: Vec<f64>,
    pub residuals: Vec<MaxwellResidual>,
    pub first_order: ConvergenceOrder,
    pub second_order: ConvergenceOrder,
}

fn order_of(lambdas: &[f64], values: &[f64]) -> Result<ConvergenceOrder> {
    if values.iter().all(|&v| v <= EXACT_THRESHOLD) {
        return Ok(ConvergenceOrder::Exact);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        lambdas.iter().zip(values).filter(|(_, &v)| v >= EXACT_FLOOR).map(|(&x, &y)| (x, y)).unzip();
    let (order, residual) = fit_log_slope(&xs, &ys)?;
    Ok(ConvergenceOrder::Fitted { order, residual })
}

/// Runs photon trajectories of the given profiles on a ring of `length` at
/// each `lambda` for `frames` recorded frames, one every `cadence` steps, and
/// fits how the Maxwell residuals shrink with `lambda`.
///
/// With `cadence = 1` the lattice fields satisfy the central-difference
/// equations exactly; larger cadences measure the truncation of the wider
/// time stencil against the one-site space stencil.
pub fn maxwell_residual_study(
    right: &Profile,
    left: &Profile,
    length: f64,
    lambdas: &[f64],
    frames: usize,
    cadence: u64,
) -> Result<MaxwellStudy> {
    let mut residuals = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let n = (length / lambda).round() as usize;
        let spec = LatticeSpec::for_process(ProcessKind::Photon, n, lambda, 0.0)?;
        let sample = |p: &Profile| -> Vec<f64> { (0..n).map(|s| p.evaluate(spec.position(s)).re).collect() };
        let mut state = ProcessState::from_fields(spec, ProcessKind::Photon, vec![sample(right), sample(left)])?;
        let mut recorded = vec![(state.fields[0].values.clone(), state.fields[1].values.clone())];
        processes::run_with(&mut state, cadence * (frames.saturating_sub(1)) as u64, cadence, |s| {
            recorded.push((s.fields[0].values.clone(), s.fields[1].values.clone()));
            Ok(())
        })?;
        residuals.push(maxwell_residual(&recorded, lambda, cadence as f64 * spec.tau)?);
    }
    let first: Vec<f64> = residuals.iter().map(|r| r.first).collect();
    let second: Vec<f64> = residuals.iter().map(|r| r.second).collect();
    Ok(MaxwellStudy {
        lambdas: lambdas.to_vec(),
        first_order: order_of(lambdas, &first)?,
        second_order: order_of(lambdas, &second)?,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profiles(length: f64) -> (Profile, Profile) {
        let p = 2.0 * std::f64::consts::PI / length;
        (
            Profile::Gaussian { center: length / 2.0, width: length / 10.0, momentum: 2.0 * p, period: length },
            Profile::Cosine { amplitude: 0.5, momentum: 3.0 * p, phase: 0.3 },
        )
    }

    #[test]
    fn unit_cadence_residual_vanishes() {
        let (r, l) = profiles(1.0);
        let study = maxwell_residual_study(&r, &l, 1.0, &[1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0], 8, 1).unwrap();
        assert!(study.first_order.is_exact(), "{study:?}");
        assert!(study.second_order.is_exact());
    }

    #[test]
    fn wider_time_stencil_is_second_order() {
        let (r, l) = profiles(1.0);
        let lambdas = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0];
        let study = maxwell_residual_study(&r, &l, 1.0, &lambdas, 8, 2).unwrap();
        for order in [study.first_order, study.second_order] {
            let p = order.value().unwrap();
            assert!((p - 2.0).abs() < 0.3, "{study:?}");
        }
    }
}
