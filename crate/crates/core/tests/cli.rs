use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vpsim::cli::{CliError, Number, OrderField, Summary};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_vpsim")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(bin())
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

fn summary(out: &Path) -> Summary {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

fn error_record(output: &Output) -> CliError {
    #[derive(serde::Deserialize)]
    struct Record {
        error: CliError,
    }
    let text = String::from_utf8(output.stderr.clone()).unwrap();
    serde_json::from_str::<Record>(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}")).error
}

#[test]
fn census_demo_reports_110_on_7_sites() {
    let dir = tempfile::tempdir().unwrap();
    let output = run("census", &configs().join("census_demo.json"), dir.path(), &[]);
    assert!(output.status.success(), "{output:?}");
    let s = summary(dir.path());
    assert_eq!(s.census, Some(Number::Int(110)));
    assert_eq!(s.occupied_sites, Some(7));
    assert_eq!(s.step, Some(3));
    let raw: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(raw["census"], 110);
    assert_eq!(raw["occupied_sites"], 7);
    assert_eq!(raw["step"], 3);
    assert_eq!(raw["spec"]["k"], 1.0);
    assert_eq!(raw["spec"]["tau"], 1.0);
    assert_eq!(raw["spec"]["lambda"], 1.0);
}

#[test]
fn simulate_photon_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"kind": "photon", "N": 64, "lambda": 0.1, "steps": 10}"#);
    let out = dir.path().join("out");
    let output = run("simulate", &config, &out, &[]);
    assert!(output.status.success(), "{output:?}");
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,site,species,value"));
    // t = 0 plus ten observed steps.
    assert_eq!(lines.count(), 64 * 2 * 11);

    let output = run("simulate", &config, &out, &["--cadence", "5"]);
    assert!(output.status.success());
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count() - 1, 64 * 2 * 3);
    assert_eq!(summary(&out).frames, Some(3));
}

#[test]
fn float_cells_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = run("simulate", &configs().join("dirac_dispersion.json"), &out, &["--cadence", "50"]);
    assert!(output.status.success(), "{output:?}");
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cell = line.rsplit(',').next().unwrap();
        let v: f64 = cell.parse().unwrap();
        assert_eq!(format!("{v:?}"), cell);
    }
}

#[test]
fn converge_photon_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let output = run("converge", &configs().join("photon_gaussian.json"), dir.path(), &[]);
    assert!(output.status.success(), "{output:?}");
    assert_eq!(summary(dir.path()).order, Some(OrderField::Label("exact".to_string())));
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("lambda,error"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn converge_schrodinger_is_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let output = run("converge", &configs().join("schrodinger_converge.json"), dir.path(), &[]);
    assert!(output.status.success(), "{output:?}");
    match summary(dir.path()).order {
        Some(OrderField::Value(p)) => assert!((p - 2.0).abs() < 0.3, "order {p}"),
        other => panic!("unexpected order {other:?}"),
    }
}

#[test]
fn dispersion_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let output = run("dispersion", &configs().join("dirac_dispersion.json"), dir.path(), &[]);
    assert!(output.status.success(), "{output:?}");
    let csv = fs::read_to_string(dir.path().join("dispersion.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("q,branch,omega_lattice,growth,omega_continuum,deviation"));
    // Two branches for each of the 65 nonnegative modes.
    assert_eq!(lines.clone().count(), 130);
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 6);
        assert!(cells[1] == "positive" || cells[1] == "negative");
    }
}

#[test]
fn output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, config, file) in [
        ("simulate", "schrodinger_converge.json", "trajectory.csv"),
        ("simulate", "kleingordon_integer.json", "trajectory.csv"),
        ("dispersion", "dirac_dispersion.json", "dispersion.csv"),
        ("converge", "schrodinger_converge.json", "convergence.csv"),
    ] {
        let a = dir.path().join(format!("{cmd}-{config}-a"));
        let b = dir.path().join(format!("{cmd}-{config}-b"));
        assert!(run(cmd, &configs().join(config), &a, &[]).status.success());
        assert!(run(cmd, &configs().join(config), &b, &[]).status.success());
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{cmd} {config}");
        assert_eq!(fs::read(a.join("summary.json")).unwrap(), fs::read(b.join("summary.json")).unwrap());
    }
}

#[test]
fn summary_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, config) in [
        ("census", "census_demo.json"),
        ("simulate", "dirac_dispersion.json"),
        ("converge", "photon_gaussian.json"),
        ("converge", "schrodinger_converge.json"),
        ("dispersion", "kleingordon_integer.json"),
    ] {
        let out = dir.path().join(format!("{cmd}-{config}"));
        assert!(run(cmd, &configs().join(config), &out, &["--cadence", "10"]).status.success());
        let text = fs::read_to_string(out.join("summary.json")).unwrap();
        let parsed: Summary = serde_json::from_str(&text).unwrap();
        let emitted = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
        assert_eq!(emitted, text, "{cmd} {config}");
        assert_eq!(serde_json::from_str::<Summary>(&emitted).unwrap(), parsed);
    }
}

#[test]
fn config_errors_exit_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"kind": "schrodinger", "N": 16, "lambda": 1, "m": 1, "k": 1, "steps": 3}"#, "k", "k != 1/(2m)"),
        (r#"{"kind": "photon", "N": 16, "lambda": 1, "steps": 3, "color": "red"}"#, "color", "unknown field"),
        (r#"{"kind": "dirac", "N": 16, "lambda": 0.5, "m": 1, "mode": "integer", "steps": 3}"#, "mode", "integer k"),
        (r#"{"kind": "photon", "N": 16, "lambda": 1}"#, "steps", "required"),
    ];
    for (text, path, needle) in cases {
        let config = write_config(dir.path(), text);
        let output = run("simulate", &config, &dir.path().join("out"), &[]);
        assert_eq!(output.status.code(), Some(2), "{text}");
        let err = error_record(&output);
        assert_eq!(err.exit_code, 2);
        assert_eq!(err.path.unwrap_or_default(), path, "{text}");
        assert!(err.message.contains(needle), "{}", err.message);
    }
}

#[test]
fn cli_mode_override_checks_integer_k() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = run("census", &configs().join("dirac_dispersion.json"), &out, &["--mode", "integer"]);
    assert_eq!(output.status.code(), Some(2));
    assert_eq!(error_record(&output).path.as_deref(), Some("mode"));
}

#[test]
fn integer_overflow_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"kind": "schrodinger", "N": 256, "lambda": 1, "m": 0.5, "mode": "integer", "steps": 100,
            "initial": {"type": "delta_pair", "site": 128}}"#,
    );
    let output = run("census", &config, &dir.path().join("out"), &[]);
    assert_eq!(output.status.code(), Some(3));
    assert!(error_record(&output).message.contains("overflow"));
}

#[test]
fn io_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let output = run("census", &dir.path().join("missing.json"), &dir.path().join("out"), &[]);
    assert_eq!(output.status.code(), Some(4));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let output = run("census", &configs().join("census_demo.json"), &blocker, &[]);
    assert_eq!(output.status.code(), Some(4));
    assert_eq!(error_record(&output).kind, vpsim::cli::ErrorKind::Io);
}
