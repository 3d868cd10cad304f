use proptest::prelude::*;

use vpsim::analysis::spectral::{max_field_difference, spectral_step};
use vpsim::lattice::make_state;
use vpsim::processes::advance;
use vpsim::*;

fn spec(kind: ProcessKind, n: usize, lambda: f64, m: f64) -> LatticeSpec {
    LatticeSpec::for_process(kind, n, lambda, m).unwrap()
}

fn fields(kind: ProcessKind, n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, n), kind.field_count())
}

fn int_fields(kind: ProcessKind, n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-50i64..50, n), kind.field_count())
}

fn any_kind() -> impl Strategy<Value = ProcessKind> {
    prop::sample::select(ProcessKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schrodinger_sums_are_conserved_exactly(f in int_fields(ProcessKind::Schrodinger, 32), steps in 0u64..12) {
        let s = spec(ProcessKind::Schrodinger, 32, 1.0, 0.5);
        let mut state = ProcessState::from_fields(s, ProcessKind::Schrodinger, f).unwrap();
        let before = (state.total(Species::A).unwrap(), state.total(Species::B).unwrap());
        advance(&mut state, steps).unwrap();
        prop_assert_eq!(before, (state.total(Species::A).unwrap(), state.total(Species::B).unwrap()));
    }

    #[test]
    fn schrodinger_float_sums_are_conserved(f in fields(ProcessKind::Schrodinger, 32), m in 8.0f64..32.0) {
        // Large m keeps the band-edge amplification of roundoff small over the run.
        let s = spec(ProcessKind::Schrodinger, 32, 0.1, m);
        let mut state = ProcessState::from_fields(s, ProcessKind::Schrodinger, f).unwrap();
        let before = [state.total(Species::A).unwrap(), state.total(Species::B).unwrap()];
        advance(&mut state, 1000).unwrap();
        let reference = state.fields.iter().flat_map(|f| &f.values).map(|v| v.abs()).sum::<f64>();
        let after = [state.total(Species::A).unwrap(), state.total(Species::B).unwrap()];
        for (b, a) in before.iter().zip(after) {
            prop_assert!((b - a).abs() <= 1e-12 * reference, "{} vs {} (scale {})", b, a, reference);
        }
    }

    #[test]
    fn dirac_norm_grows_by_one_plus_k_squared(f in fields(ProcessKind::Dirac, 16), m in 0.0f64..2.0) {
        let s = spec(ProcessKind::Dirac, 16, 0.25, m);
        let mut state = ProcessState::from_fields(s, ProcessKind::Dirac, f).unwrap();
        let factor = 1.0 + s.k * s.k;
        for _ in 0..50 {
            let before = state.complex_view().norm_sqr();
            step(&mut state).unwrap();
            let ratio = state.complex_view().norm_sqr() / before;
            prop_assert!((ratio / factor - 1.0).abs() <= 1e-10, "ratio {} factor {}", ratio, factor);
        }
    }

    #[test]
    fn photon_returns_after_n_steps(f in fields(ProcessKind::Photon, 24)) {
        let s = spec(ProcessKind::Photon, 24, 0.5, 0.0);
        let initial = ProcessState::from_fields(s, ProcessKind::Photon, f).unwrap();
        let mut state = initial.clone();
        advance(&mut state, 24).unwrap();
        prop_assert_eq!(&state.fields, &initial.fields);
    }

    #[test]
    fn spectral_step_matches_stepper(kind in any_kind(), seed in any::<u64>(), m in 0.1f64..2.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let n = 32;
        let s = spec(kind, n, 0.1, if kind == ProcessKind::Photon { 0.0 } else { m });
        let f: Vec<Vec<f64>> = (0..kind.field_count()).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut state = ProcessState::from_fields(s, kind, f).unwrap();
        let spectral = spectral_step(&state).unwrap();
        step(&mut state).unwrap();
        prop_assert!(max_field_difference(&spectral, &state).unwrap() <= 1e-12);
    }

    #[test]
    fn delta_support_grows_at_most_one_site_per_step(kind in any_kind(), steps in 0u64..10) {
        let n = 64;
        let m = match kind {
            ProcessKind::Photon => 0.0,
            ProcessKind::Schrodinger => 0.5,
            _ => 1.0,
        };
        let s = spec(kind, n, 1.0, m);
        let mut state: ProcessState<i64> = make_state(s, kind, &InitialCondition::DeltaPair { site: 32 }).unwrap();
        advance(&mut state, steps).unwrap();
        for field in state.current_fields() {
            for (site, v) in field.values.iter().enumerate() {
                if *v != 0 {
                    prop_assert!((site as i64 - 32).unsigned_abs() <= steps, "{} at {} after {}", kind, site, steps);
                }
            }
        }
    }

    #[test]
    fn integer_and_float_runs_agree(kind in any_kind(), f in int_fields(ProcessKind::Dirac, 16), steps in 0u64..8) {
        let m = match kind {
            ProcessKind::Photon => 0.0,
            ProcessKind::Schrodinger => 0.5,
            _ => 1.0,
        };
        let s = spec(kind, 16, 1.0, m);
        let f: Vec<Vec<i64>> = f.into_iter().take(kind.field_count()).collect();
        let mut exact = ProcessState::from_fields(s, kind, f.clone()).unwrap();
        let as_float = f.iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
        let mut float = ProcessState::<f64>::from_fields(s, kind, as_float).unwrap();
        advance(&mut exact, steps).unwrap();
        advance(&mut float, steps).unwrap();
        for (a, b) in exact.fields.iter().zip(&float.fields) {
            let a: Vec<f64> = a.values.iter().map(|&x| x as f64).collect();
            prop_assert_eq!(&a, &b.values);
        }
    }

    #[test]
    fn config_summary_round_trips(kind in any_kind(), n in 2usize..20, steps in 0u64..6, m in 1u32..4) {
        let dir = tempfile::tempdir().unwrap();
        let mass = if kind == ProcessKind::Photon { String::new() } else { format!(r#""m": {}, "#, f64::from(m) / 2.0) };
        let config = format!(r#"{{"kind": "{kind}", "N": {}, "lambda": 0.5, {mass}"steps": {steps}}}"#, 2 * n);
        let path = dir.path().join("c.json");
        std::fs::write(&path, config).unwrap();
        let args = vpsim::cli::RunArgs { config: path, out: dir.path().join("out"), mode: None, cadence: None };
        let summary = vpsim::cli::execute(&vpsim::cli::Command::Simulate(args)).unwrap();
        let text = std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
        let parsed: vpsim::cli::Summary = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(parsed, summary);
    }
}
