//! Per-mode update matrices and the lattice dispersion they imply.
//!
//! Fourier convention: `f_s = sum_q f(q) exp(i q s lambda)`, so a shift
//! `f_{s+1}` multiplies mode `q` by `exp(i q lambda)`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, PlaneWaveBranch, ProcessKind, ProcessState};
use crate::oracle::continuum_dispersion;

pub type Mat2 = [[Complex64; 2]; 2];

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `4 sin^2(q lambda / 2)`, minus the symbol of the discrete Laplacian stencil.
pub fn laplacian_symbol(spec: &LatticeSpec, q: f64) -> f64 {
    let half = (q * spec.lambda / 2.0).sin();
    4.0 * half * half
}

/// Exact one-step update of the Fourier coefficients of mode `q`.
///
/// * Schrödinger, on `(a, b)`: `[[1, k mu], [-k mu, 1]]`.
/// * Dirac, on `(psi1, psi2)`: `[[e^{iq lambda}, -ik], [-ik, e^{-iq lambda}]]`.
/// * Klein-Gordon, companion form on `(a(t), a(t-1))`: `[[2 cos(q lambda) - k, -1], [1, 0]]`.
/// * Photon, on `(r, l)`: `diag(e^{-iq lambda}, e^{iq lambda})`, one scalar per chirality.
pub fn mode_matrix(kind: ProcessKind, spec: &LatticeSpec, q: f64) -> Result<Mat2> {
    spec.mode_index(q)?;
    Ok(mode_matrix_unchecked(kind, spec, q))
}

fn mode_matrix_unchecked(kind: ProcessKind, spec: &LatticeSpec, q: f64) -> Mat2 {
    let theta = q * spec.lambda;
    let k = spec.k;
    let c = Complex64::from;
    match kind {
        ProcessKind::Schrodinger => {
            let km = k * laplacian_symbol(spec, q);
            [[c(1.0), c(km)], [c(-km), c(1.0)]]
        }
        ProcessKind::Dirac => [
            [Complex64::from_polar(1.0, theta), -I * k],
            [-I * k, Complex64::from_polar(1.0, -theta)],
        ],
        ProcessKind::KleinGordon => [[c(2.0 * theta.cos() - k), c(-1.0)], [c(1.0), c(0.0)]],
        ProcessKind::Photon => [
            [Complex64::from_polar(1.0, -theta), c(0.0)],
            [c(0.0), Complex64::from_polar(1.0, theta)],
        ],
    }
}

pub fn mat_vec(m: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

pub fn determinant(m: &Mat2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `tr^2 - 4 det`, written to avoid cancelling the trace against the determinant.
fn discriminant(m: &Mat2) -> Complex64 {
    let split = m[0][0] - m[1][1];
    split * split + 4.0 * m[0][1] * m[1][0]
}

/// Both eigenvalues from the characteristic polynomial.
pub fn eigenvalues(m: &Mat2) -> [Complex64; 2] {
    let trace = m[0][0] + m[1][1];
    let disc = discriminant(m).sqrt();
    [(trace + disc) / 2.0, (trace - disc) / 2.0]
}

/// A repeated eigenvalue with a one-dimensional eigenspace.
pub fn is_defective(m: &Mat2) -> bool {
    let trace = m[0][0] + m[1][1];
    let disc = discriminant(m);
    let scale = 1.0 + trace.norm_sqr();
    let repeated = disc.norm() <= 1e-13 * scale;
    let scalar = m[0][1].norm() <= 1e-14 && m[1][0].norm() <= 1e-14 && (m[0][0] - m[1][1]).norm() <= 1e-14;
    repeated && !scalar
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    pub q: f64,
    pub branch: PlaneWaveBranch,
    /// `-arg(eigenvalue) / tau`, so a mode `exp(-i omega t)` has frequency `omega`.
    pub omega_lattice: f64,
    /// `|eigenvalue|` per step.
    pub growth: f64,
    pub omega_continuum: f64,
    pub deviation: f64,
    /// The update matrix is not diagonalizable at this mode.
    pub defective: bool,
}

impl DispersionSample {
    pub fn relative_deviation(&self) -> f64 {
        if self.omega_continuum == 0.0 {
            self.deviation.abs()
        } else {
            (self.deviation / self.omega_continuum).abs()
        }
    }
}

fn branch_pair(kind: ProcessKind) -> [PlaneWaveBranch; 2] {
    match kind {
        ProcessKind::Photon => [PlaneWaveBranch::Right, PlaneWaveBranch::Left],
        _ => [PlaneWaveBranch::Positive, PlaneWaveBranch::Negative],
    }
}

/// Lattice frequencies and growth factors of each branch at each mode.
///
/// Eigenvalues are matched to the continuum branches by the sign of their
/// frequency; ties (both eigenvalues real, or degenerate at q = 0) are settled
/// by continuity with the nearest smaller |q| already processed. Output rows
/// follow the input order, two rows (one per branch) per mode.
pub fn lattice_dispersion(kind: ProcessKind, spec: &LatticeSpec, qs: &[f64]) -> Result<Vec<DispersionSample>> {
    for &q in qs {
        spec.mode_index(q)?;
    }
    let branches = branch_pair(kind);
    let mut order: Vec<usize> = (0..qs.len()).collect();
    order.sort_by(|&i, &j| qs[i].abs().total_cmp(&qs[j].abs()));

    let mut rows: Vec<Option<[DispersionSample; 2]>> = vec![None; qs.len()];
    let mut previous: Option<[f64; 2]> = None;
    for idx in order {
        let q = qs[idx];
        let m = mode_matrix_unchecked(kind, spec, q);
        let defective = is_defective(&m);
        let evs = match kind {
            // Diagonal: the chiralities are the matrix entries themselves.
            ProcessKind::Photon => [m[0][0], m[1][1]],
            _ => eigenvalues(&m),
        };
        let omega = match kind {
            // Eigenvalues e^{-+i q lambda}: the phase per step is known exactly,
            // so skip the roundoff of recovering it through arg().
            ProcessKind::Photon => [q * (spec.lambda / spec.tau), -q * (spec.lambda / spec.tau)],
            _ => evs.map(|ev| -ev.arg() / spec.tau),
        };
        let continuum_positive = continuum_dispersion(kind, spec.mass, q);
        let continuum = match kind {
            ProcessKind::Photon => [q, -q],
            _ => [continuum_positive, -continuum_positive],
        };
        let swap = match kind {
            ProcessKind::Photon => false,
            _ => {
                let sign_straight = omega[0] > 0.0 && omega[1] < 0.0;
                let sign_swapped = omega[1] > 0.0 && omega[0] < 0.0;
                if sign_straight {
                    false
                } else if sign_swapped {
                    true
                } else if let Some(prev) = previous {
                    let straight = (omega[0] - prev[0]).abs() + (omega[1] - prev[1]).abs();
                    let swapped = (omega[1] - prev[0]).abs() + (omega[0] - prev[1]).abs();
                    swapped < straight
                } else {
                    evs[1].norm() > evs[0].norm()
                }
            }
        };
        let (evs, omega) = if swap { ([evs[1], evs[0]], [omega[1], omega[0]]) } else { (evs, omega) };
        previous = Some(omega);
        let sample = |b: usize| DispersionSample {
            q,
            branch: branches[b],
            omega_lattice: omega[b],
            growth: evs[b].norm(),
            omega_continuum: continuum[b],
            deviation: omega[b] - continuum[b],
            defective,
        };
        rows[idx] = Some([sample(0), sample(1)]);
    }
    Ok(rows.into_iter().flat_map(|r| r.expect("every mode processed")).collect())
}

/// All lattice modes `q_n = 2 pi n / (N lambda)` for `n` in `0..=N/2`.
pub fn nonnegative_modes(spec: &LatticeSpec) -> Vec<f64> {
    (0..=spec.n_sites as i64 / 2).map(|n| spec.mode_momentum(n)).collect()
}

/// One step taken in Fourier space: transform, apply [`mode_matrix`] to every
/// mode, transform back. Independent of the real-space steppers.
pub fn spectral_step(state: &ProcessState<f64>) -> Result<ProcessState<f64>> {
    let spec = state.spec;
    let n = spec.n_sites;
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let values = |i: usize| state.fields[i].values.clone();
    let complex = |re: Vec<f64>, im: Option<Vec<f64>>| -> Vec<Complex64> {
        match im {
            Some(im) => re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect(),
            None => re.into_iter().map(Complex64::from).collect(),
        }
    };
    let (mut x, mut y) = match state.kind {
        ProcessKind::Schrodinger => (complex(values(0), None), complex(values(1), None)),
        ProcessKind::Dirac => (complex(values(0), Some(values(1))), complex(values(2), Some(values(3)))),
        ProcessKind::KleinGordon | ProcessKind::Photon => (complex(values(0), None), complex(values(1), None)),
    };
    forward.process(&mut x);
    forward.process(&mut y);
    // rustfft's forward transform uses exp(-2 pi i n s / N), so bin n carries q = 2 pi n / (N lambda).
    for bin in 0..n {
        let q = spec.mode_momentum(bin as i64);
        let m = mode_matrix_unchecked(state.kind, &spec, q);
        let [nx, ny] = mat_vec(&m, [x[bin], y[bin]]);
        x[bin] = nx;
        y[bin] = ny;
    }
    inverse.process(&mut x);
    inverse.process(&mut y);
    let scale = 1.0 / n as f64;
    let re = |v: &[Complex64]| -> Vec<f64> { v.iter().map(|z| z.re * scale).collect() };
    let im = |v: &[Complex64]| -> Vec<f64> { v.iter().map(|z| z.im * scale).collect() };
    let fields = match state.kind {
        ProcessKind::Dirac => vec![re(&x), im(&x), re(&y), im(&y)],
        _ => vec![re(&x), re(&y)],
    };
    let mut next = ProcessState::from_fields(spec, state.kind, fields)?;
    next.step_index = state.step_index + 1;
    Ok(next)
}

/// Largest absolute difference between two states' stored fields.
pub fn max_field_difference(a: &ProcessState<f64>, b: &ProcessState<f64>) -> Result<f64> {
    if a.kind != b.kind || a.spec.n_sites != b.spec.n_sites {
        return Err(Error::KindMismatch { expected: a.kind.to_string(), found: b.kind.to_string() });
    }
    Ok(a.fields
        .iter()
        .zip(&b.fields)
        .flat_map(|(fa, fb)| fa.values.iter().zip(&fb.values).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn schrodinger_zero_mode_is_identity() {
        let spec = LatticeSpec::for_process(ProcessKind::Schrodinger, 16, 0.1, 1.0).unwrap();
        let m = mode_matrix(ProcessKind::Schrodinger, &spec, 0.0).unwrap();
        assert_eq!(m[0][0], Complex64::from(1.0));
        assert_eq!(m[0][1], Complex64::from(0.0));
        assert_eq!(m[1][0], Complex64::from(0.0));
        assert_eq!(m[1][1], Complex64::from(1.0));
    }

    #[test]
    fn schrodinger_band_edge_growth() {
        // k = 1/2 (m = 1), q lambda = pi: mu = 4, |eigenvalue| = sqrt(1 + 4) = sqrt 5.
        let spec = LatticeSpec::for_process(ProcessKind::Schrodinger, 16, 0.1, 1.0).unwrap();
        let m = mode_matrix(ProcessKind::Schrodinger, &spec, PI / spec.lambda).unwrap();
        for ev in eigenvalues(&m) {
            assert!((ev.norm() - 5.0_f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn dirac_determinant_is_one_plus_k_squared() {
        let spec = LatticeSpec::for_process(ProcessKind::Dirac, 32, 0.1, 2.0).unwrap();
        for n in 0..32 {
            let m = mode_matrix(ProcessKind::Dirac, &spec, spec.mode_momentum(n)).unwrap();
            assert!((determinant(&m).norm() - (1.0 + spec.k * spec.k)).abs() < 1e-14);
        }
    }

    #[test]
    fn non_lattice_mode_rejected() {
        let spec = LatticeSpec::for_process(ProcessKind::Dirac, 32, 0.1, 2.0).unwrap();
        assert!(matches!(mode_matrix(ProcessKind::Dirac, &spec, 0.1234), Err(Error::NonLatticeMomentum { .. })));
    }

    #[test]
    fn photon_dispersion_is_exact() {
        let spec = LatticeSpec::for_process(ProcessKind::Photon, 64, 0.05, 0.0).unwrap();
        let qs: Vec<f64> = (-31..32).map(|n| spec.mode_momentum(n)).collect();
        for sample in lattice_dispersion(ProcessKind::Photon, &spec, &qs).unwrap() {
            assert!(sample.deviation.abs() < 1e-12, "{sample:?}");
            assert_eq!(sample.growth, 1.0);
        }
    }

    #[test]
    fn kleingordon_small_q_dispersion() {
        // 2 cos(omega tau) = 2 cos(q lambda) - k, solved here by bisection on [0, pi / tau].
        let (mass, lambda) = (1.0, 0.01);
        let spec = LatticeSpec::for_process(ProcessKind::KleinGordon, 512, lambda, mass).unwrap();
        let qs: Vec<f64> = (1..=8).map(|n| spec.mode_momentum(n)).collect();
        let rows = lattice_dispersion(ProcessKind::KleinGordon, &spec, &qs).unwrap();
        for row in rows.iter().filter(|r| r.branch == PlaneWaveBranch::Positive) {
            let target = 2.0 * (row.q * lambda).cos() - spec.k;
            let (mut lo, mut hi) = (0.0_f64, PI / spec.tau);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if 2.0 * (mid * spec.tau).cos() > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((row.omega_lattice - lo).abs() < 1e-9, "{row:?}");
            assert!(row.deviation.abs() < lambda * lambda * 10.0 * row.omega_continuum.powi(3));
            assert!((row.growth - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kleingordon_band_edge_reports_defect_without_panicking() {
        // Pick k so that 2 cos(q lambda) - k = -2 exactly at q lambda = pi/2: k = 2.
        let spec = LatticeSpec::for_process(ProcessKind::KleinGordon, 8, 1.0, 2.0_f64.sqrt()).unwrap();
        let q = spec.mode_momentum(2);
        let mut tweaked = spec;
        tweaked.k = 2.0;
        let rows = lattice_dispersion(ProcessKind::KleinGordon, &tweaked, &[q]).unwrap();
        assert!(rows.iter().all(|r| r.defective));
        let rows = lattice_dispersion(ProcessKind::KleinGordon, &spec, &nonnegative_modes(&spec)).unwrap();
        assert_eq!(rows.len(), 2 * 5);
    }

    #[test]
    fn schrodinger_positive_branch_is_arctan() {
        let spec = LatticeSpec::for_process(ProcessKind::Schrodinger, 64, 0.05, 1.0).unwrap();
        let qs = nonnegative_modes(&spec);
        let rows = lattice_dispersion(ProcessKind::Schrodinger, &spec, &qs).unwrap();
        for row in rows.iter().filter(|r| r.branch == PlaneWaveBranch::Positive) {
            let expected = (spec.k * laplacian_symbol(&spec, row.q)).atan() / spec.tau;
            assert!((row.omega_lattice - expected).abs() <= 1e-12 * expected.max(1.0), "{row:?}");
        }
    }
}
