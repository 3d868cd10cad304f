//! The four master equations as exact one-step maps on a [`ProcessState`].
//!
//! Every right-hand side reads the level at time t only; new values are written
//! into a scratch buffer that is swapped in afterwards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Count, ProcessKind, ProcessState, Species, SpeciesField};

fn expect_kind<T>(state: &ProcessState<T>, kind: ProcessKind) -> Result<()> {
    if state.kind == kind {
        Ok(())
    } else {
        Err(Error::KindMismatch { expected: kind.to_string(), found: state.kind.to_string() })
    }
}

#[inline]
fn ring(n: usize, s: usize) -> (usize, usize) {
    (if s == 0 { n - 1 } else { s - 1 }, if s + 1 == n { 0 } else { s + 1 })
}

/// Fills `scratch` with fresh buffers of the right shape.
fn prepare_scratch<T: Count>(state: &mut ProcessState<T>, count: usize) {
    let n = state.spec.n_sites;
    if state.scratch.len() != count || state.scratch.iter().any(|b| b.len() != n) {
        state.scratch = vec![vec![T::ZERO; n]; count];
    }
}

fn overflow(step: u64, site: usize) -> Error {
    Error::Overflow { step, site }
}

/// `a_s <- a_s - k (b_{s-1} - 2 b_s + b_{s+1})`, `b_s <- b_s + k (a_{s-1} - 2 a_s + a_{s+1})`.
pub fn step_schrodinger<T: Count>(state: &mut ProcessState<T>) -> Result<()> {
    expect_kind(state, ProcessKind::Schrodinger)?;
    let k = state.coupling();
    let n = state.spec.n_sites;
    let step = state.step_index + 1;
    prepare_scratch(state, 2);
    let mut scratch = std::mem::take(&mut state.scratch);
    {
        let a = &state.fields[0].values;
        let b = &state.fields[1].values;
        let (new_a, new_b) = scratch.split_at_mut(1);
        let (new_a, new_b) = (&mut new_a[0], &mut new_b[0]);
        let laplacian = |f: &[T], s: usize| -> Option<T> {
            let (l, r) = ring(n, s);
            f[l].try_sub(f[s].try_add(f[s])?)?.try_add(f[r])
        };
        for s in 0..n {
            new_a[s] = laplacian(b, s)
                .and_then(|lap| k.try_mul(lap))
                .and_then(|d| a[s].try_sub(d))
                .ok_or_else(|| overflow(step, s))?;
            new_b[s] = laplacian(a, s)
                .and_then(|lap| k.try_mul(lap))
                .and_then(|d| b[s].try_add(d))
                .ok_or_else(|| overflow(step, s))?;
        }
    }
    for (field, buffer) in state.fields.iter_mut().zip(scratch.iter_mut()) {
        std::mem::swap(&mut field.values, buffer);
    }
    state.scratch = scratch;
    state.step_index = step;
    Ok(())
}

/// `a_s <- a_{s+1} + k d_s`, `b_s <- b_{s+1} - k c_s`, `c_s <- c_{s-1} + k b_s`,
/// `d_s <- d_{s-1} - k a_s`, all right-hand sides at the old level.
pub fn step_dirac<T: Count>(state: &mut ProcessState<T>) -> Result<()> {
    expect_kind(state, ProcessKind::Dirac)?;
    let k = state.coupling();
    let n = state.spec.n_sites;
    let step = state.step_index + 1;
    prepare_scratch(state, 4);
    let mut scratch = std::mem::take(&mut state.scratch);
    {
        let a = &state.fields[0].values;
        let b = &state.fields[1].values;
        let c = &state.fields[2].values;
        let d = &state.fields[3].values;
        let [new_a, new_b, new_c, new_d] = &mut scratch[..] else {
            unreachable!("four scratch buffers")
        };
        for s in 0..n {
            let (l, r) = ring(n, s);
            let err = || overflow(step, s);
            new_a[s] = k.try_mul(d[s]).and_then(|x| a[r].try_add(x)).ok_or_else(err)?;
            new_b[s] = k.try_mul(c[s]).and_then(|x| b[r].try_sub(x)).ok_or_else(err)?;
            new_c[s] = k.try_mul(b[s]).and_then(|x| c[l].try_add(x)).ok_or_else(err)?;
            new_d[s] = k.try_mul(a[s]).and_then(|x| d[l].try_sub(x)).ok_or_else(err)?;
        }
    }
    for (field, buffer) in state.fields.iter_mut().zip(scratch.iter_mut()) {
        std::mem::swap(&mut field.values, buffer);
    }
    state.scratch = scratch;
    state.step_index = step;
    Ok(())
}

/// `a_s(t+1) = a_{s+1}(t) + a_{s-1}(t) - k a_s(t) - a_s(t-1)`; the levels rotate.
pub fn step_kleingordon<T: Count>(state: &mut ProcessState<T>) -> Result<()> {
    expect_kind(state, ProcessKind::KleinGordon)?;
    let k = state.coupling();
    let n = state.spec.n_sites;
    let step = state.step_index + 1;
    prepare_scratch(state, 1);
    let mut scratch = std::mem::take(&mut state.scratch);
    {
        let current = &state.fields[0].values;
        let previous = &state.fields[1].values;
        let next = &mut scratch[0];
        for s in 0..n {
            let (l, r) = ring(n, s);
            next[s] = current[r]
                .try_add(current[l])
                .and_then(|x| x.try_sub(k.try_mul(current[s])?))
                .and_then(|x| x.try_sub(previous[s]))
                .ok_or_else(|| overflow(step, s))?;
        }
    }
    // previous <- next, then swap so current = next and previous = old current.
    std::mem::swap(&mut state.fields[1].values, &mut scratch[0]);
    state.fields.swap(0, 1);
    state.scratch = scratch;
    state.step_index = step;
    Ok(())
}

/// `r_s <- r_{s-1}`, `l_s <- l_{s+1}`.
pub fn step_photon<T: Count>(state: &mut ProcessState<T>) -> Result<()> {
    expect_kind(state, ProcessKind::Photon)?;
    let n = state.spec.n_sites;
    prepare_scratch(state, 2);
    let mut scratch = std::mem::take(&mut state.scratch);
    {
        let r = &state.fields[0].values;
        let l = &state.fields[1].values;
        let (new_r, new_l) = scratch.split_at_mut(1);
        new_r[0][1..].copy_from_slice(&r[..n - 1]);
        new_r[0][0] = r[n - 1];
        new_l[0][..n - 1].copy_from_slice(&l[1..]);
        new_l[0][n - 1] = l[0];
    }
    for (field, buffer) in state.fields.iter_mut().zip(scratch.iter_mut()) {
        std::mem::swap(&mut field.values, buffer);
    }
    state.scratch = scratch;
    state.step_index += 1;
    Ok(())
}

/// Advances the state by one step of its own process.
pub fn step<T: Count>(state: &mut ProcessState<T>) -> Result<()> {
    match state.kind {
        ProcessKind::Schrodinger => step_schrodinger(state),
        ProcessKind::Dirac => step_dirac(state),
        ProcessKind::KleinGordon => step_kleingordon(state),
        ProcessKind::Photon => step_photon(state),
    }
}

/// `2 F[a]_s = a_{s+1} + a_{s-1} - k a_s`, exact in integer mode.
pub fn kg_doubled_forward_branch<T: Count>(level: &[T], k: T) -> Result<Vec<T>> {
    let n = level.len();
    (0..n)
        .map(|s| {
            let (l, r) = ring(n, s);
            level[r]
                .try_add(level[l])
                .and_then(|x| x.try_sub(k.try_mul(level[s])?))
                .ok_or(Error::Overflow { step: 0, site: s })
        })
        .collect()
}

/// `F[a]_s = a_{s+1}/2 + a_{s-1}/2 - (k/2) a_s`, the map that both the causal and
/// the reverse-causal Klein-Gordon processes apply to the present level.
///
/// As a standalone forward map this is a damped diffusion, not Klein-Gordon.
pub fn kg_forward_branch<T: Count>(level: &SpeciesField<T>, k: f64) -> SpeciesField<f64> {
    let n = level.values.len();
    let a: Vec<f64> = level.values.iter().map(|v| v.to_f64()).collect();
    let values = (0..n)
        .map(|s| {
            let (l, r) = ring(n, s);
            0.5 * a[r] + 0.5 * a[l] - 0.5 * k * a[s]
        })
        .collect();
    SpeciesField { species: level.species, values }
}

/// Site sums, absolute-count census and occupancy after a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport<T> {
    pub step_index: u64,
    pub sums: Vec<(Species, T)>,
    pub census: Vec<(Species, T)>,
    pub total_census: T,
    /// Sites where any species has a nonzero count.
    pub occupied_sites: usize,
}

impl<T: Count> StepReport<T> {
    pub fn from_state(state: &ProcessState<T>) -> Result<Self> {
        let err = |_| Error::Overflow { step: state.step_index, site: 0 };
        let current = state.current_fields();
        let mut sums = Vec::with_capacity(current.len());
        let mut census = Vec::with_capacity(current.len());
        let mut total = T::ZERO;
        for field in current {
            sums.push((field.species, field.total().map_err(err)?));
            let c = field.census().map_err(err)?;
            census.push((field.species, c));
            total = total.try_add(c).ok_or(Error::Overflow { step: state.step_index, site: 0 })?;
        }
        let occupied_sites = (0..state.spec.n_sites)
            .filter(|&s| current.iter().any(|f| f.values[s] != T::ZERO))
            .count();
        Ok(StepReport { step_index: state.step_index, sums, census, total_census: total, occupied_sites })
    }

    pub fn census_of(&self, species: Species) -> Option<T> {
        self.census.iter().find(|(s, _)| *s == species).map(|(_, c)| *c)
    }

    pub fn sum_of(&self, species: Species) -> Option<T> {
        self.sums.iter().find(|(s, _)| *s == species).map(|(_, c)| *c)
    }
}

/// Applies `n_steps` steps without observing.
pub fn advance<T: Count>(state: &mut ProcessState<T>, n_steps: u64) -> Result<()> {
    for _ in 0..n_steps {
        step(state)?;
    }
    Ok(())
}

/// Runs `n_steps` steps, reporting after every `cadence`-th step of this run.
pub fn run<T: Count>(state: &mut ProcessState<T>, n_steps: u64, cadence: u64) -> Result<Vec<StepReport<T>>> {
    let mut reports = Vec::new();
    run_with(state, n_steps, cadence, |s| {
        reports.push(StepReport::from_state(s)?);
        Ok(())
    })?;
    Ok(reports)
}

/// Runs `n_steps` steps and calls `observer` after every `cadence`-th step.
pub fn run_with<T, F>(state: &mut ProcessState<T>, n_steps: u64, cadence: u64, mut observer: F) -> Result<()>
where
    T: Count,
    F: FnMut(&ProcessState<T>) -> Result<()>,
{
    if cadence == 0 {
        return Err(Error::InvalidSpec("observer cadence must be >= 1".to_string()));
    }
    for j in 1..=n_steps {
        step(state)?;
        if j % cadence == 0 {
            observer(state)?;
        }
    }
    Ok(())
}
