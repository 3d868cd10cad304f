//! Ring geometry, time scalings, species storage and initial conditions.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{self, ContinuumSolution, Profile};

/// Relative tolerance used for the scaling and coupling relations.
pub const RELATION_TOLERANCE: f64 = 1e-12;

pub(crate) fn relatively_equal(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    scale == 0.0 || (a - b).abs() <= tol * scale
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Schrodinger,
    Dirac,
    #[serde(rename = "kleingordon", alias = "klein-gordon", alias = "klein_gordon")]
    KleinGordon,
    Photon,
}

impl ProcessKind {
    pub const ALL: [ProcessKind; 4] = [
        ProcessKind::Schrodinger,
        ProcessKind::Dirac,
        ProcessKind::KleinGordon,
        ProcessKind::Photon,
    ];

    /// Species carried by the process, in storage order.
    pub fn species(self) -> &'static [Species] {
        match self {
            ProcessKind::Schrodinger => &[Species::A, Species::B],
            ProcessKind::Dirac => &[Species::A, Species::B, Species::C, Species::D],
            ProcessKind::KleinGordon => &[Species::A],
            ProcessKind::Photon => &[Species::R, Species::L],
        }
    }

    /// Number of stored site arrays. Klein-Gordon keeps the levels t and t-1.
    pub fn field_count(self) -> usize {
        match self {
            ProcessKind::KleinGordon => 2,
            other => other.species().len(),
        }
    }

    pub fn scaling(self) -> Scaling {
        match self {
            ProcessKind::Schrodinger => Scaling::Diffusive,
            _ => Scaling::Ballistic,
        }
    }

    /// The per-step coupling tied to the continuum mass by the process scaling.
    pub fn coupling(self, lambda: f64, mass: f64) -> Result<f64> {
        match self {
            ProcessKind::Schrodinger => {
                if mass > 0.0 && mass.is_finite() {
                    Ok(1.0 / (2.0 * mass))
                } else {
                    Err(Error::InvalidSpec(format!(
                        "schrodinger process requires m > 0, got m = {mass}"
                    )))
                }
            }
            ProcessKind::Dirac => Ok(mass * lambda),
            ProcessKind::KleinGordon => Ok(mass * mass * lambda * lambda),
            ProcessKind::Photon => Ok(0.0),
        }
    }

    /// Human-readable form of the coupling relation, used in error messages.
    pub fn coupling_relation(self) -> &'static str {
        match self {
            ProcessKind::Schrodinger => "k = 1/(2m)",
            ProcessKind::Dirac => "k = m*lambda",
            ProcessKind::KleinGordon => "k = m^2*lambda^2",
            ProcessKind::Photon => "k = 0",
        }
    }

    /// Number of complex components of the assembled continuum field.
    pub fn components(self) -> usize {
        match self {
            ProcessKind::Schrodinger | ProcessKind::KleinGordon => 1,
            ProcessKind::Dirac | ProcessKind::Photon => 2,
        }
    }
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProcessKind::Schrodinger => "schrodinger",
            ProcessKind::Dirac => "dirac",
            ProcessKind::KleinGordon => "kleingordon",
            ProcessKind::Photon => "photon",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Species {
    A,
    B,
    C,
    D,
    R,
    L,
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Species::A => "A",
            Species::B => "B",
            Species::C => "C",
            Species::D => "D",
            Species::R => "R",
            Species::L => "L",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// tau / lambda^2 = 1
    Diffusive,
    /// tau / lambda = 1
    Ballistic,
}

impl Scaling {
    pub fn time_step(self, lambda: f64) -> f64 {
        match self {
            Scaling::Diffusive => lambda * lambda,
            Scaling::Ballistic => lambda,
        }
    }
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scaling::Diffusive => "diffusive",
            Scaling::Ballistic => "ballistic",
        })
    }
}

/// Geometry and couplings of a periodic ring of `n_sites` sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n_sites: usize,
    pub lambda: f64,
    pub tau: f64,
    pub scaling: Scaling,
    pub k: f64,
    pub mass: f64,
}

impl LatticeSpec {
    /// Derives `tau` and `k` from `lambda` and `mass` under the scaling of `kind`.
    pub fn for_process(kind: ProcessKind, n_sites: usize, lambda: f64, mass: f64) -> Result<Self> {
        let scaling = kind.scaling();
        let spec = LatticeSpec {
            n_sites,
            lambda,
            tau: scaling.time_step(lambda),
            scaling,
            k: kind.coupling(lambda, mass)?,
            mass,
        };
        spec.validate(kind)?;
        Ok(spec)
    }

    pub fn validate(&self, kind: ProcessKind) -> Result<()> {
        if self.n_sites < 4 || self.n_sites % 2 != 0 {
            return Err(Error::InvalidSpec(format!(
                "n_sites must be even and >= 4, got {}",
                self.n_sites
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidSpec(format!("m must be >= 0, got {}", self.mass)));
        }
        if self.scaling != kind.scaling() {
            return Err(Error::InvalidSpec(format!(
                "{kind} process requires {} scaling, got {}",
                kind.scaling(),
                self.scaling
            )));
        }
        let tau = self.scaling.time_step(self.lambda);
        if !relatively_equal(self.tau, tau, RELATION_TOLERANCE) {
            let relation = match self.scaling {
                Scaling::Diffusive => "tau = lambda^2",
                Scaling::Ballistic => "tau = lambda",
            };
            return Err(Error::InvalidSpec(format!(
                "scaling constraint violated: {relation} requires tau = {tau}, got {}",
                self.tau
            )));
        }
        let k = kind.coupling(self.lambda, self.mass)?;
        if !relatively_equal(self.k, k, RELATION_TOLERANCE) {
            return Err(Error::InvalidSpec(format!(
                "coupling constraint violated: {} requires k = {k}, got {}",
                kind.coupling_relation(),
                self.k
            )));
        }
        Ok(())
    }

    /// Ring circumference N * lambda.
    pub fn length(&self) -> f64 {
        self.n_sites as f64 * self.lambda
    }

    pub fn position(&self, site: usize) -> f64 {
        site as f64 * self.lambda
    }

    pub fn neighbor(&self, site: usize, offset: isize) -> usize {
        let n = self.n_sites as isize;
        (site as isize + offset).rem_euclid(n) as usize
    }

    /// Momentum of lattice mode `n`: 2*pi*n / (N*lambda).
    pub fn mode_momentum(&self, n: i64) -> f64 {
        2.0 * std::f64::consts::PI * n as f64 / self.length()
    }

    /// Inverse of [`LatticeSpec::mode_momentum`]; rejects momenta off the mode grid.
    pub fn mode_index(&self, momentum: f64) -> Result<i64> {
        let n = momentum * self.length() / (2.0 * std::f64::consts::PI);
        let rounded = n.round();
        if !momentum.is_finite() || (n - rounded).abs() > 1e-9 * rounded.abs().max(1.0) {
            return Err(Error::NonLatticeMomentum { momentum });
        }
        Ok(rounded as i64)
    }
}

/// Scalar stored in a species array: `f64` for real-valued runs, `i64` for
/// exact particle counts. Integer arithmetic is checked; `None` means overflow.
pub trait Count:
    Copy + PartialEq + PartialOrd + Default + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    const ZERO: Self;
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    fn try_add(self, rhs: Self) -> Option<Self>;
    fn try_sub(self, rhs: Self) -> Option<Self>;
    fn try_mul(self, rhs: Self) -> Option<Self>;
    fn try_abs(self) -> Option<Self>;
    fn to_f64(self) -> f64;
    /// Lossless conversion from `f64`; `None` if the value is not representable.
    fn from_f64_exact(x: f64) -> Option<Self>;
}

impl Count for f64 {
    const ZERO: Self = 0.0;
    const EXACT: bool = false;

    #[inline]
    fn try_add(self, rhs: Self) -> Option<Self> {
        Some(self + rhs)
    }
    #[inline]
    fn try_sub(self, rhs: Self) -> Option<Self> {
        Some(self - rhs)
    }
    #[inline]
    fn try_mul(self, rhs: Self) -> Option<Self> {
        Some(self * rhs)
    }
    #[inline]
    fn try_abs(self) -> Option<Self> {
        Some(self.abs())
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn from_f64_exact(x: f64) -> Option<Self> {
        Some(x)
    }
}

impl Count for i64 {
    const ZERO: Self = 0;
    const EXACT: bool = true;

    #[inline]
    fn try_add(self, rhs: Self) -> Option<Self> {
        self.checked_add(rhs)
    }
    #[inline]
    fn try_sub(self, rhs: Self) -> Option<Self> {
        self.checked_sub(rhs)
    }
    #[inline]
    fn try_mul(self, rhs: Self) -> Option<Self> {
        self.checked_mul(rhs)
    }
    #[inline]
    fn try_abs(self) -> Option<Self> {
        self.checked_abs()
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn from_f64_exact(x: f64) -> Option<Self> {
        // 2^63 is exactly representable; anything at or beyond it is out of range.
        const LIMIT: f64 = 9_223_372_036_854_775_808.0;
        if x.is_finite() && x.fract() == 0.0 && x >= -LIMIT && x < LIMIT {
            Some(x as i64)
        } else {
            None
        }
    }
}

/// Site counts of one species. Negative entries are antiparticles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesField<T> {
    pub species: Species,
    pub values: Vec<T>,
}

impl<T: Count> SpeciesField<T> {
    pub fn zeros(species: Species, n_sites: usize) -> Self {
        SpeciesField { species, values: vec![T::ZERO; n_sites] }
    }

    /// Site sum, exact in integer mode. Float sums run in sorted order so the
    /// result does not depend on where on the ring the values sit.
    pub fn total(&self) -> Result<T> {
        canonical_sum(self.values.iter().copied())
    }

    /// Sum of absolute counts, exact in integer mode.
    pub fn census(&self) -> Result<T> {
        let abs = self
            .values
            .iter()
            .map(|v| v.try_abs())
            .collect::<Option<Vec<T>>>()
            .ok_or(Error::Overflow { step: 0, site: 0 })?;
        canonical_sum(abs.into_iter())
    }
}

fn canonical_sum<T: Count>(values: impl Iterator<Item = T>) -> Result<T> {
    let mut values: Vec<T> = values.collect();
    if !T::EXACT {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    }
    values
        .into_iter()
        .try_fold(T::ZERO, |acc, v| acc.try_add(v))
        .ok_or(Error::Overflow { step: 0, site: 0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneWaveBranch {
    Positive,
    Negative,
    Right,
    Left,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Unit count of every species at one site (both levels for Klein-Gordon).
    DeltaPair { site: usize },
    /// Gaussian envelope exp(-(x-center)^2 / (2 width^2)) with carrier momentum.
    Gaussian { center: f64, width: f64, momentum: f64 },
    PlaneWave { momentum: f64, branch: PlaneWaveBranch },
    /// Explicit arrays, one per stored field in storage order.
    Custom { fields: Vec<Vec<f64>> },
}

/// Complete state of one process: species arrays plus the step counter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessState<T> {
    pub spec: LatticeSpec,
    pub kind: ProcessKind,
    /// Storage order follows [`ProcessKind::species`]; for Klein-Gordon the
    /// two entries are the levels t and t-1.
    pub fields: Vec<SpeciesField<T>>,
    pub step_index: u64,
    #[serde(skip)]
    pub(crate) scratch: Vec<Vec<T>>,
}

impl<T: Count> PartialEq for ProcessState<T> {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
            && self.kind == other.kind
            && self.fields == other.fields
            && self.step_index == other.step_index
    }
}

impl<T: Count> ProcessState<T> {
    /// Builds a state directly from species arrays.
    pub fn from_fields(spec: LatticeSpec, kind: ProcessKind, fields: Vec<Vec<T>>) -> Result<Self> {
        spec.validate(kind)?;
        if fields.len() != kind.field_count() {
            return Err(Error::InvalidInitial(format!(
                "{kind} process stores {} fields, got {}",
                kind.field_count(),
                fields.len()
            )));
        }
        if let Some(bad) = fields.iter().find(|f| f.len() != spec.n_sites) {
            return Err(Error::InvalidInitial(format!(
                "field of length {} on a ring of {} sites",
                bad.len(),
                spec.n_sites
            )));
        }
        if T::EXACT && T::from_f64_exact(spec.k).is_none() {
            return Err(Error::InvalidSpec(format!(
                "integer mode requires an integer coupling, got k = {}",
                spec.k
            )));
        }
        let tags: Vec<Species> = match kind {
            ProcessKind::KleinGordon => vec![Species::A, Species::A],
            other => other.species().to_vec(),
        };
        let fields = tags
            .into_iter()
            .zip(fields)
            .map(|(species, values)| SpeciesField { species, values })
            .collect();
        Ok(ProcessState { spec, kind, fields, step_index: 0, scratch: Vec::new() })
    }

    pub fn zeros(spec: LatticeSpec, kind: ProcessKind) -> Result<Self> {
        Self::from_fields(spec, kind, vec![vec![T::ZERO; spec.n_sites]; kind.field_count()])
    }

    /// The coupling as a stored scalar. Integer states were checked at construction.
    pub fn coupling(&self) -> T {
        T::from_f64_exact(self.spec.k).expect("coupling validated at construction")
    }

    /// Physical time reached: step_index * tau.
    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.spec.tau
    }

    fn position_of(&self, species: Species) -> Result<usize> {
        self.kind.species().iter().position(|&s| s == species).ok_or_else(|| {
            Error::SpeciesNotPresent { species: species.to_string(), kind: self.kind.to_string() }
        })
    }

    /// Current-level field of a species.
    pub fn field(&self, species: Species) -> Result<&SpeciesField<T>> {
        Ok(&self.fields[self.position_of(species)?])
    }

    pub fn site_value(&self, species: Species, site: usize) -> Result<T> {
        let field = self.field(species)?;
        field
            .values
            .get(site)
            .copied()
            .ok_or(Error::SiteOutOfRange { site, n_sites: self.spec.n_sites })
    }

    pub fn total(&self, species: Species) -> Result<T> {
        self.field(species)?.total()
    }

    /// The current-level arrays, one per species (excludes the Klein-Gordon history level).
    pub fn current_fields(&self) -> &[SpeciesField<T>] {
        &self.fields[..self.kind.species().len()]
    }

    /// Klein-Gordon level t-1.
    pub fn previous_level(&self) -> Option<&SpeciesField<T>> {
        match self.kind {
            ProcessKind::KleinGordon => self.fields.get(1),
            _ => None,
        }
    }

    /// Exchanges the Klein-Gordon levels t and t-1, which reverses the
    /// direction of time for subsequent steps.
    pub fn swap_levels(&mut self) -> Result<()> {
        if self.kind != ProcessKind::KleinGordon {
            return Err(Error::KindMismatch {
                expected: ProcessKind::KleinGordon.to_string(),
                found: self.kind.to_string(),
            });
        }
        self.fields.swap(0, 1);
        self.fields[0].species = Species::A;
        self.fields[1].species = Species::A;
        Ok(())
    }

    /// Assembled complex fields: psi = a + ib (Schrödinger), (psi1, psi2) =
    /// (a + ib, c + id) (Dirac), a (Klein-Gordon), (Psi_R, Psi_L) = (r, l) (photon).
    pub fn complex_view(&self) -> ComplexFieldView {
        let v = |i: usize| -> Vec<f64> { self.fields[i].values.iter().map(|x| x.to_f64()).collect() };
        let pair = |re: Vec<f64>, im: Vec<f64>| -> Vec<Complex64> {
            re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect()
        };
        let real = |re: Vec<f64>| -> Vec<Complex64> { re.into_iter().map(Complex64::from).collect() };
        let components = match self.kind {
            ProcessKind::Schrodinger => vec![pair(v(0), v(1))],
            ProcessKind::Dirac => vec![pair(v(0), v(1)), pair(v(2), v(3))],
            ProcessKind::KleinGordon => vec![real(v(0))],
            ProcessKind::Photon => vec![real(v(0)), real(v(1))],
        };
        ComplexFieldView { kind: self.kind, components }
    }
}

/// Continuum-facing complex fields assembled from real species counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFieldView {
    pub kind: ProcessKind,
    pub components: Vec<Vec<Complex64>>,
}

impl ComplexFieldView {
    /// Sum over sites and components of |field|^2.
    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// Per-site density summed over components.
    pub fn density(&self) -> Vec<f64> {
        let n = self.components.first().map_or(0, Vec::len);
        (0..n).map(|s| self.components.iter().map(|c| c[s].norm_sqr()).sum()).collect()
    }
}

/// Builds the initial state of a process.
///
/// Plane waves are sampled from the continuum solution; for Klein-Gordon the
/// level t = -tau is sampled from the same solution at time -tau.
pub fn make_state<T: Count>(
    spec: LatticeSpec,
    kind: ProcessKind,
    ic: &InitialCondition,
) -> Result<ProcessState<T>> {
    spec.validate(kind)?;
    let n = spec.n_sites;
    let real_fields: Vec<Vec<f64>> = match ic {
        InitialCondition::DeltaPair { site } => {
            if *site >= n {
                return Err(Error::SiteOutOfRange { site: *site, n_sites: n });
            }
            let mut delta = vec![0.0; n];
            delta[*site] = 1.0;
            vec![delta; kind.field_count()]
        }
        InitialCondition::Custom { fields } => fields.clone(),
        InitialCondition::PlaneWave { momentum, branch } => {
            spec.mode_index(*momentum)?;
            let solution = oracle::plane_wave(kind, spec.mass, *momentum, *branch)?;
            levels_from_solution(&solution, &spec, kind)
        }
        InitialCondition::Gaussian { center, width, momentum } => {
            spec.mode_index(*momentum)?;
            if !(*width > 0.0) {
                return Err(Error::InvalidInitial(format!("gaussian width must be > 0, got {width}")));
            }
            gaussian_fields(&spec, kind, *center, *width, *momentum)?
        }
    };
    let mut converted = Vec::with_capacity(real_fields.len());
    for field in real_fields {
        let values = field
            .into_iter()
            .map(|x| T::from_f64_exact(x))
            .collect::<Option<Vec<T>>>()
            .ok_or_else(|| {
                Error::InvalidInitial(
                    "integer mode requires integer-valued initial data".to_string(),
                )
            })?;
        converted.push(values);
    }
    ProcessState::from_fields(spec, kind, converted)
}

fn levels_from_solution(
    solution: &ContinuumSolution,
    spec: &LatticeSpec,
    kind: ProcessKind,
) -> Vec<Vec<f64>> {
    let mut fields = solution.sample_species(spec, 0.0);
    if kind == ProcessKind::KleinGordon {
        fields.extend(solution.sample_species(spec, -spec.tau));
    }
    fields
}

fn gaussian_fields(
    spec: &LatticeSpec,
    kind: ProcessKind,
    center: f64,
    width: f64,
    momentum: f64,
) -> Result<Vec<Vec<f64>>> {
    let period = spec.length();
    match kind {
        ProcessKind::Schrodinger => {
            let solution = oracle::schrodinger_gaussian(spec.mass, center, width, momentum, period)?;
            Ok(solution.sample_species(spec, 0.0))
        }
        ProcessKind::Photon => {
            let profile = Profile::Gaussian { center, width, momentum, period };
            let solution = oracle::photon_solution(profile.clone(), profile);
            Ok(solution.sample_species(spec, 0.0))
        }
        ProcessKind::Dirac => {
            // Positive-energy spinor of the carrier times the envelope.
            let plane = oracle::dirac_solution(spec.mass, momentum, PlaneWaveBranch::Positive)?;
            let spinor = plane.spinor().expect("dirac plane wave carries a spinor");
            let mut fields = vec![vec![0.0; spec.n_sites]; 4];
            for s in 0..spec.n_sites {
                let x = spec.position(s);
                let carrier = Complex64::from_polar(1.0, momentum * (x - center))
                    * oracle::periodic_gaussian(x, center, width, period);
                let psi1 = spinor[0] * carrier;
                let psi2 = spinor[1] * carrier;
                fields[0][s] = psi1.re;
                fields[1][s] = psi1.im;
                fields[2][s] = psi2.re;
                fields[3][s] = psi2.im;
            }
            Ok(fields)
        }
        ProcessKind::KleinGordon => {
            // Envelope advected at the group velocity p/E between the two levels.
            let energy = oracle::continuum_dispersion(kind, spec.mass, momentum);
            let velocity = if energy > 0.0 { momentum / energy } else { 0.0 };
            let level = |t: f64| -> Vec<f64> {
                (0..spec.n_sites)
                    .map(|s| {
                        let x = spec.position(s);
                        oracle::periodic_gaussian(x, center + velocity * t, width, period)
                            * (momentum * (x - center) - energy * t).cos()
                    })
                    .collect()
            };
            Ok(vec![level(0.0), level(-spec.tau)])
        }
    }
}
