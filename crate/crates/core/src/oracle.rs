//! Closed-form continuum solutions of the free 1+1 dimensional equations.
//!
//! Conventions (hbar = c = 1):
//!
//! * Schrödinger: `d_t psi = (i / 2m) d_x^2 psi`, plane waves `exp(i(px - Et))`, `E = p^2 / 2m`.
//! * Dirac: `d_t psi1 = d_x psi1 - i m psi2`, `d_t psi2 = -d_x psi2 - i m psi1`.
//!   A plane wave `u exp(i(px - Et))` needs `H u = E u` with `H = [[-p, m], [m, p]]`.
//! * Klein-Gordon: `(d_t^2 - d_x^2) psi = -m^2 psi`, real waves `cos(px - Et)`.
//! * Photon: `d_t Psi_R = -d_x Psi_R`, `d_t Psi_L = d_x Psi_L`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, PlaneWaveBranch, ProcessKind};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Real profile transported by the photon equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Zero,
    Cosine { amplitude: f64, momentum: f64, phase: f64 },
    /// `amplitude * exp(i momentum x)`; complex-valued.
    Exponential { amplitude: f64, momentum: f64 },
    /// Periodized Gaussian envelope times `cos(momentum (x - center))`.
    Gaussian { center: f64, width: f64, momentum: f64, period: f64 },
    /// Periodic samples at spacing `spacing`, linearly interpolated between sites.
    Samples { values: Vec<f64>, spacing: f64 },
}

impl Profile {
    pub fn evaluate(&self, x: f64) -> Complex64 {
        match self {
            Profile::Zero => Complex64::new(0.0, 0.0),
            Profile::Cosine { amplitude, momentum, phase } => {
                Complex64::from(amplitude * (momentum * x + phase).cos())
            }
            Profile::Exponential { amplitude, momentum } => Complex64::from_polar(*amplitude, momentum * x),
            Profile::Gaussian { center, width, momentum, period } => Complex64::from(
                periodic_gaussian(x, *center, *width, *period) * (momentum * (x - center)).cos(),
            ),
            Profile::Samples { values, spacing } => {
                let n = values.len();
                if n == 0 {
                    return Complex64::new(0.0, 0.0);
                }
                let u = x / spacing;
                let base = u.floor();
                let frac = u - base;
                let i0 = (base as i64).rem_euclid(n as i64) as usize;
                let i1 = (i0 + 1) % n;
                if frac == 0.0 {
                    Complex64::from(values[i0])
                } else {
                    Complex64::from(values[i0] * (1.0 - frac) + values[i1] * frac)
                }
            }
        }
    }
}

/// Gaussian envelope `exp(-(x - center)^2 / (2 width^2))` summed over periodic images.
pub fn periodic_gaussian(x: f64, center: f64, width: f64, period: f64) -> f64 {
    let images = image_count(width, period);
    (-images..=images)
        .map(|j| {
            let y = x - center + image_offset(j, period);
            (-y * y / (2.0 * width * width)).exp()
        })
        .sum()
}

fn image_offset(j: i64, period: f64) -> f64 {
    if j == 0 {
        0.0
    } else {
        j as f64 * period
    }
}

fn image_count(width: f64, period: f64) -> i64 {
    if !period.is_finite() || period <= 0.0 {
        return 0;
    }
    (2.0 + (10.0 * width / period).ceil()).min(200.0) as i64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ContinuumSolution {
    SchrodingerPlaneWave { mass: f64, momentum: f64 },
    /// Free Gaussian with complex-width spreading, periodized with `period`.
    SchrodingerGaussian { mass: f64, center: f64, width: f64, momentum: f64, period: f64 },
    DiracPlaneWave { mass: f64, momentum: f64, energy: f64, spinor: [Complex64; 2] },
    KleinGordonWave { mass: f64, momentum: f64, energy: f64 },
    Photon { right: Profile, left: Profile },
}

pub fn schrodinger_solution(mass: f64, momentum: f64) -> Result<ContinuumSolution> {
    check_schrodinger_mass(mass)?;
    Ok(ContinuumSolution::SchrodingerPlaneWave { mass, momentum })
}

pub fn schrodinger_gaussian(
    mass: f64,
    center: f64,
    width: f64,
    momentum: f64,
    period: f64,
) -> Result<ContinuumSolution> {
    check_schrodinger_mass(mass)?;
    if !(width > 0.0) {
        return Err(Error::InvalidInitial(format!("gaussian width must be > 0, got {width}")));
    }
    Ok(ContinuumSolution::SchrodingerGaussian { mass, center, width, momentum, period })
}

fn check_schrodinger_mass(mass: f64) -> Result<()> {
    if mass > 0.0 && mass.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("schrodinger solution requires m > 0, got m = {mass}")))
    }
}

/// The 2x2 symbol `H(p) = [[-p, m], [m, p]]` of the Dirac system.
pub fn dirac_symbol(mass: f64, momentum: f64) -> [[Complex64; 2]; 2] {
    [
        [Complex64::from(-momentum), Complex64::from(mass)],
        [Complex64::from(mass), Complex64::from(momentum)],
    ]
}

/// Unit eigenvector of the Dirac symbol for `energy`, first nonzero component real-positive.
pub fn dirac_spinor(mass: f64, momentum: f64, energy: f64) -> [Complex64; 2] {
    // Null vectors of the two rows of H - E.
    let from_first = [mass, momentum + energy];
    let from_second = [energy - momentum, mass];
    let norm = |v: [f64; 2]| (v[0] * v[0] + v[1] * v[1]).sqrt();
    let mut v = if norm(from_first) >= norm(from_second) { from_first } else { from_second };
    let n = norm(v);
    if n == 0.0 {
        // m = 0 and p = E = 0: every spinor is an eigenvector.
        v = [1.0, 0.0];
    } else {
        v = [v[0] / n, v[1] / n];
    }
    let lead = if v[0].abs() > 1e-14 { v[0] } else { v[1] };
    if lead < 0.0 {
        v = [-v[0], -v[1]];
    }
    [Complex64::from(v[0]), Complex64::from(v[1])]
}

pub fn dirac_solution(mass: f64, momentum: f64, branch: PlaneWaveBranch) -> Result<ContinuumSolution> {
    let magnitude = (momentum * momentum + mass * mass).sqrt();
    let energy = match branch {
        PlaneWaveBranch::Positive => magnitude,
        PlaneWaveBranch::Negative => -magnitude,
        other => {
            return Err(Error::InvalidInitial(format!(
                "dirac plane waves take a positive or negative energy branch, got {other:?}"
            )))
        }
    };
    let spinor = dirac_spinor(mass, momentum, energy);
    Ok(ContinuumSolution::DiracPlaneWave { mass, momentum, energy, spinor })
}

/// Real traveling wave `cos(px - Et)`, `E = sqrt(p^2 + m^2)`; the negative branch travels the other way.
pub fn kleingordon_solution(mass: f64, momentum: f64, branch: PlaneWaveBranch) -> Result<ContinuumSolution> {
    let magnitude = (momentum * momentum + mass * mass).sqrt();
    let energy = match branch {
        PlaneWaveBranch::Positive => magnitude,
        PlaneWaveBranch::Negative => -magnitude,
        other => {
            return Err(Error::InvalidInitial(format!(
                "klein-gordon waves take a positive or negative energy branch, got {other:?}"
            )))
        }
    };
    Ok(ContinuumSolution::KleinGordonWave { mass, momentum, energy })
}

pub fn photon_solution(right: Profile, left: Profile) -> ContinuumSolution {
    ContinuumSolution::Photon { right, left }
}

/// Plane-wave solution of `kind` used to seed lattice states.
pub fn plane_wave(
    kind: ProcessKind,
    mass: f64,
    momentum: f64,
    branch: PlaneWaveBranch,
) -> Result<ContinuumSolution> {
    match kind {
        ProcessKind::Schrodinger => match branch {
            PlaneWaveBranch::Positive => schrodinger_solution(mass, momentum),
            other => Err(Error::InvalidInitial(format!(
                "schrodinger plane waves have a single positive branch, got {other:?}"
            ))),
        },
        ProcessKind::Dirac => dirac_solution(mass, momentum, branch),
        ProcessKind::KleinGordon => kleingordon_solution(mass, momentum, branch),
        ProcessKind::Photon => {
            let wave = Profile::Cosine { amplitude: 1.0, momentum, phase: 0.0 };
            match branch {
                PlaneWaveBranch::Right => Ok(photon_solution(wave, Profile::Zero)),
                PlaneWaveBranch::Left => Ok(photon_solution(Profile::Zero, wave)),
                other => Err(Error::InvalidInitial(format!(
                    "photon plane waves take a right or left branch, got {other:?}"
                ))),
            }
        }
    }
}

/// Continuum frequency of mode `q` on the positive (right-moving) branch.
pub fn continuum_dispersion(kind: ProcessKind, mass: f64, q: f64) -> f64 {
    match kind {
        ProcessKind::Schrodinger => q * q / (2.0 * mass),
        ProcessKind::Dirac | ProcessKind::KleinGordon => (q * q + mass * mass).sqrt(),
        ProcessKind::Photon => q,
    }
}

impl ContinuumSolution {
    pub fn kind(&self) -> ProcessKind {
        match self {
            ContinuumSolution::SchrodingerPlaneWave { .. } | ContinuumSolution::SchrodingerGaussian { .. } => {
                ProcessKind::Schrodinger
            }
            ContinuumSolution::DiracPlaneWave { .. } => ProcessKind::Dirac,
            ContinuumSolution::KleinGordonWave { .. } => ProcessKind::KleinGordon,
            ContinuumSolution::Photon { .. } => ProcessKind::Photon,
        }
    }

    pub fn spinor(&self) -> Option<[Complex64; 2]> {
        match self {
            ContinuumSolution::DiracPlaneWave { spinor, .. } => Some(*spinor),
            _ => None,
        }
    }

    pub fn energy(&self) -> Option<f64> {
        match self {
            ContinuumSolution::SchrodingerPlaneWave { mass, momentum } => Some(momentum * momentum / (2.0 * mass)),
            ContinuumSolution::DiracPlaneWave { energy, .. } | ContinuumSolution::KleinGordonWave { energy, .. } => {
                Some(*energy)
            }
            _ => None,
        }
    }

    /// Field components at `(x, t)`: `[psi]`, `[psi1, psi2]`, `[psi]` or `[Psi_R, Psi_L]`.
    pub fn evaluate(&self, x: f64, t: f64) -> Vec<Complex64> {
        match self {
            ContinuumSolution::SchrodingerPlaneWave { mass, momentum } => {
                let energy = momentum * momentum / (2.0 * mass);
                vec![Complex64::from_polar(1.0, momentum * x - energy * t)]
            }
            ContinuumSolution::SchrodingerGaussian { mass, center, width, momentum, period } => {
                vec![schrodinger_gaussian_value(*mass, *center, *width, *momentum, *period, x, t)]
            }
            ContinuumSolution::DiracPlaneWave { momentum, energy, spinor, .. } => {
                let phase = Complex64::from_polar(1.0, momentum * x - energy * t);
                vec![spinor[0] * phase, spinor[1] * phase]
            }
            ContinuumSolution::KleinGordonWave { momentum, energy, .. } => {
                vec![Complex64::from((momentum * x - energy * t).cos())]
            }
            ContinuumSolution::Photon { right, left } => vec![right.evaluate(x - t), left.evaluate(x + t)],
        }
    }

    /// Components sampled at every lattice site.
    pub fn sample(&self, spec: &LatticeSpec, t: f64) -> Vec<Vec<Complex64>> {
        let kind = self.kind();
        let mut out = vec![Vec::with_capacity(spec.n_sites); kind.components()];
        for s in 0..spec.n_sites {
            for (component, value) in out.iter_mut().zip(self.evaluate(spec.position(s), t)) {
                component.push(value);
            }
        }
        out
    }

    /// Real species arrays whose assembled fields equal the solution at time `t`
    /// (only the current level for Klein-Gordon).
    pub fn sample_species(&self, spec: &LatticeSpec, t: f64) -> Vec<Vec<f64>> {
        let components = self.sample(spec, t);
        match self.kind() {
            ProcessKind::Schrodinger | ProcessKind::Dirac => components
                .iter()
                .flat_map(|c| [c.iter().map(|z| z.re).collect(), c.iter().map(|z| z.im).collect()])
                .collect(),
            ProcessKind::KleinGordon | ProcessKind::Photon => {
                components.iter().map(|c| c.iter().map(|z| z.re).collect()).collect()
            }
        }
    }

    /// Largest central-difference residual of the governing PDE at `(x, t)`,
    /// with spacing `h` in space and `h / 2` in time. Scales as `h^2` for
    /// smooth solutions. Unequal spacings keep the transport stencils from
    /// cancelling exactly.
    pub fn fd_residual(&self, x: f64, t: f64, h: f64) -> f64 {
        let ht = h / 2.0;
        let f = |dx: f64, dt: f64| self.evaluate(x + dx, t + dt);
        let dt = |c: usize| (f(0.0, ht)[c] - f(0.0, -ht)[c]) / (2.0 * ht);
        let dx = |c: usize| (f(h, 0.0)[c] - f(-h, 0.0)[c]) / (2.0 * h);
        let dxx = |c: usize| (f(h, 0.0)[c] - 2.0 * f(0.0, 0.0)[c] + f(-h, 0.0)[c]) / (h * h);
        let dtt = |c: usize| (f(0.0, ht)[c] - 2.0 * f(0.0, 0.0)[c] + f(0.0, -ht)[c]) / (ht * ht);
        let here = f(0.0, 0.0);
        match self {
            ContinuumSolution::SchrodingerPlaneWave { mass, .. }
            | ContinuumSolution::SchrodingerGaussian { mass, .. } => {
                (dt(0) - I / (2.0 * mass) * dxx(0)).norm()
            }
            ContinuumSolution::DiracPlaneWave { mass, .. } => {
                let r1 = dt(0) - dx(0) + I * *mass * here[1];
                let r2 = dt(1) + dx(1) + I * *mass * here[0];
                r1.norm().max(r2.norm())
            }
            ContinuumSolution::KleinGordonWave { mass, .. } => (dtt(0) - dxx(0) + mass * mass * here[0]).norm(),
            ContinuumSolution::Photon { .. } => (dt(0) + dx(0)).norm().max((dt(1) - dx(1)).norm()),
        }
    }
}

fn schrodinger_gaussian_value(
    mass: f64,
    center: f64,
    width: f64,
    momentum: f64,
    period: f64,
    x: f64,
    t: f64,
) -> Complex64 {
    // Complex width s = sigma^2 + i t / m.
    let s = Complex64::new(width * width, t / mass);
    let amplitude = (Complex64::from(width * width) / s).sqrt();
    let spread = (s.norm_sqr() / (width * width)).sqrt();
    let images = image_count(spread, period);
    let drift = momentum * t / mass;
    let phase_time = momentum * momentum * t / (2.0 * mass);
    (-images..=images)
        .map(|j| {
            let y = x - center + image_offset(j, period);
            let z = y - drift;
            amplitude * (-(z * z) / (2.0 * s) + I * (momentum * y - phase_time)).exp()
        })
        .sum()
}

/// Splits photon amplitudes into the helicity components
/// `Psi2 = (Psi_R + Psi_L) / 2`, `Psi3 = i (Psi_R - Psi_L) / 2`.
pub fn helicity_components(right: Complex64, left: Complex64) -> (Complex64, Complex64) {
    ((right + left) / 2.0, I * (right - left) / 2.0)
}

/// Electric and magnetic fields `E = Psi2`, `B = i Psi3` from real right/left
/// mover amplitudes; this gives `E = (r + l) / 2`, `B = (l - r) / 2`.
pub fn maxwell_fields(right: &[f64], left: &[f64]) -> (Vec<f64>, Vec<f64>) {
    right
        .iter()
        .zip(left)
        .map(|(&r, &l)| {
            let (psi2, psi3) = helicity_components(Complex64::from(r), Complex64::from(l));
            (psi2.re, (I * psi3).re)
        })
        .unzip()
}
