//! Center-of-density tracking on the ring and drift-velocity fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Count, ProcessState};
use crate::processes;

/// Resultant length below which the circular mean is considered undefined.
const MIN_RESULTANT: f64 = 1e-6;

/// Circular mean of a nonnegative density on a ring of `density.len()` sites
/// with spacing `lambda`, as a position in `[0, N lambda)`.
pub fn circular_center(density: &[f64], lambda: f64) -> Result<f64> {
    let n = density.len();
    let total: f64 = density.iter().sum();
    if n == 0 || !(total > 0.0) {
        return Err(Error::IllDefined("density has no weight".to_string()));
    }
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let (sin, cos) = density.iter().enumerate().fold((0.0, 0.0), |(s, c), (j, w)| {
        let angle = step * j as f64;
        (s + w * angle.sin(), c + w * angle.cos())
    });
    if (sin * sin + cos * cos).sqrt() / total < MIN_RESULTANT {
        return Err(Error::IllDefined(
            "density wraps the ring; circular mean has no preferred direction".to_string(),
        ));
    }
    let angle = sin.atan2(cos).rem_euclid(2.0 * std::f64::consts::PI);
    Ok(angle / step * lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    /// Slope of center against time over the whole record.
    pub velocity: f64,
    pub first_half_velocity: f64,
    pub second_half_velocity: f64,
    /// `|v2 / v1 - 1|`.
    pub invariance_ratio: f64,
}

fn slope(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let mt = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mx = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let stt: f64 = samples.iter().map(|s| (s.0 - mt).powi(2)).sum();
    let stx: f64 = samples.iter().map(|s| (s.0 - mt) * (s.1 - mx)).sum();
    stx / stt
}

/// Fits center velocity over the whole record and over each half.
///
/// `samples` are `(time, center)` pairs with centers in `[0, period)`; jumps
/// across the seam are unwrapped before fitting.
pub fn drift_velocity(samples: &[(f64, f64)], period: f64) -> Result<DriftReport> {
    if samples.len() < 10 {
        return Err(Error::InsufficientData(format!("need >= 10 centers, got {}", samples.len())));
    }
    let mut unwrapped = Vec::with_capacity(samples.len());
    let mut offset = 0.0;
    let mut last = samples[0].1;
    for &(t, x) in samples {
        let jump = x - last;
        if jump > period / 2.0 {
            offset -= period;
        } else if jump < -period / 2.0 {
            offset += period;
        }
        last = x;
        unwrapped.push((t, x + offset));
    }
    let mid = unwrapped.len() / 2;
    let velocity = slope(&unwrapped);
    let first = slope(&unwrapped[..=mid]);
    let second = slope(&unwrapped[mid..]);
    let invariance_ratio = if first == 0.0 {
        if second == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (second / first - 1.0).abs()
    };
    Ok(DriftReport { velocity, first_half_velocity: first, second_half_velocity: second, invariance_ratio })
}

/// Runs `n_steps` steps recording the circular center of the assembled
/// density `sum |component|^2` at t = 0 and after every `cadence`-th step.
pub fn track_centers<T: Count>(state: &mut ProcessState<T>, n_steps: u64, cadence: u64) -> Result<Vec<(f64, f64)>> {
    let lambda = state.spec.lambda;
    let mut centers = vec![(state.time(), circular_center(&state.complex_view().density(), lambda)?)];
    processes::run_with(state, n_steps, cadence, |s| {
        centers.push((s.time(), circular_center(&s.complex_view().density(), lambda)?));
        Ok(())
    })?;
    Ok(centers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeSpec, ProcessKind};

    #[test]
    fn circular_center_of_a_delta() {
        let mut d = vec![0.0; 16];
        d[5] = 2.0;
        assert!((circular_center(&d, 0.5).unwrap() - 2.5).abs() < 1e-12);
        let mut pair = vec![0.0; 16];
        pair[15] = 1.0;
        pair[1] = 1.0;
        let c = circular_center(&pair, 1.0).unwrap();
        assert!(c.abs() < 1e-12 || (c - 16.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_density_is_ill_defined() {
        assert!(matches!(circular_center(&[1.0; 8], 1.0), Err(Error::IllDefined(_))));
        assert!(circular_center(&[0.0; 8], 1.0).is_err());
    }

    #[test]
    fn photon_delta_moves_at_unit_speed() {
        let spec = LatticeSpec::for_process(ProcessKind::Photon, 32, 0.25, 0.0).unwrap();
        let mut r = vec![0.0; 32];
        r[3] = 1.0;
        let mut state = ProcessState::from_fields(spec, ProcessKind::Photon, vec![r, vec![0.0; 32]]).unwrap();
        let centers = track_centers(&mut state, 60, 1).unwrap();
        let report = drift_velocity(&centers, spec.length()).unwrap();
        assert!((report.velocity - 1.0).abs() < 1e-12, "{report:?}");
        assert!(report.invariance_ratio < 1e-12);
    }

    #[test]
    fn too_few_centers() {
        assert!(drift_velocity(&[(0.0, 0.0); 5], 1.0).is_err());
    }
}
