//! The Klein-Gordon identity `a(t+1) + a(t-1) = 2 F[a(t)]`.

use crate::error::{Error, Result};
use crate::lattice::{Count, ProcessKind, ProcessState};
use crate::processes::{self, kg_doubled_forward_branch};

/// Runs a Klein-Gordon state and returns its levels in time order, starting
/// with the two initial levels t = -1 and t = 0.
pub fn record_levels<T: Count>(state: &mut ProcessState<T>, n_steps: u64) -> Result<Vec<Vec<T>>> {
    let previous = state.previous_level().ok_or_else(|| Error::KindMismatch {
        expected: ProcessKind::KleinGordon.to_string(),
        found: state.kind.to_string(),
    })?;
    let mut levels = vec![previous.values.clone(), state.fields[0].values.clone()];
    processes::run_with(state, n_steps, 1, |s| {
        levels.push(s.fields[0].values.clone());
        Ok(())
    })?;
    Ok(levels)
}

/// Largest `|a_s(t+1) + a_s(t-1) - 2 F[a(t)]_s|` over a recorded trajectory.
///
/// The defect is formed in the trajectory's own arithmetic, so it is exactly
/// zero for integer trajectories of the Klein-Gordon recurrence.
pub fn reverse_causality_check<T: Count>(levels: &[Vec<T>], k: T) -> Result<f64> {
    if levels.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "reverse-causality check needs >= 3 levels, got {}",
            levels.len()
        )));
    }
    let mut worst = 0.0_f64;
    for window in levels.windows(3) {
        let doubled = kg_doubled_forward_branch(&window[1], k)?;
        for s in 0..doubled.len() {
            let defect = window[2][s]
                .try_add(window[0][s])
                .and_then(|x| x.try_sub(doubled[s]))
                .and_then(|x| x.try_abs())
                .ok_or(Error::Overflow { step: 0, site: s })?;
            worst = worst.max(defect.to_f64());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_state, InitialCondition, LatticeSpec, PlaneWaveBranch};

    #[test]
    fn float_defect_is_roundoff() {
        let spec = LatticeSpec::for_process(ProcessKind::KleinGordon, 64, 0.1, 1.5).unwrap();
        let ic = InitialCondition::PlaneWave { momentum: spec.mode_momentum(3), branch: PlaneWaveBranch::Positive };
        let mut state: ProcessState<f64> = make_state(spec, ProcessKind::KleinGordon, &ic).unwrap();
        let levels = record_levels(&mut state, 100).unwrap();
        let max_a = levels.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        let defect = reverse_causality_check(&levels, spec.k).unwrap();
        assert!(defect <= 1e-12 * max_a, "{defect}");
    }

    #[test]
    fn short_trajectory_is_rejected() {
        let levels = vec![vec![0_i64; 4]; 2];
        assert!(matches!(reverse_causality_check(&levels, 1), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn corrupted_trajectory_has_defect() {
        let spec = LatticeSpec::for_process(ProcessKind::KleinGordon, 8, 1.0, 1.0).unwrap();
        let mut state: ProcessState<i64> =
            make_state(spec, ProcessKind::KleinGordon, &InitialCondition::DeltaPair { site: 2 }).unwrap();
        let mut levels = record_levels(&mut state, 6).unwrap();
        assert_eq!(reverse_causality_check(&levels, 1).unwrap(), 0.0);
        levels[4][3] += 2;
        assert!(reverse_causality_check(&levels, 1).unwrap() >= 2.0);
    }
}
