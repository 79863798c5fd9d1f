//! End-to-end runs of the `ewspec` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ewspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ewspec"))
        .args(args)
        .env_remove("EWSPEC_OUT")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const RESONANT_JC: &str = r#"
model = "JC"
method = "both"

[params]
omega0 = 0.25

[time]
gamma_t = 5.0
samples_per_period = 80.0

[spectrum]
gamma = 0.05
omega_min = 0.7
omega_max = 1.3
points = 241

[output]
name = "vrs"
"#;

fn run_spectrum(config: &str, out: &Path) -> Output {
    ewspec(&["--out", out.to_str().unwrap(), "spectrum", config])
}

fn sidecar(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_csv_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "vrs.toml", RESONANT_JC);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run_spectrum(&cfg, &a).status.success());
    assert!(run_spectrum(&cfg, &b).status.success());
    assert_eq!(fs::read(a.join("vrs.csv")).unwrap(), fs::read(b.join("vrs.csv")).unwrap());
}

#[test]
fn both_methods_give_two_columns_and_their_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "vrs.toml", RESONANT_JC);
    let out = run_spectrum(&cfg, tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("vrs.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "omega,S_numeric,S_closed_form");
    assert_eq!(csv.lines().count(), 242);
    let meta = sidecar(&tmp.path().join("vrs.json"));
    let diff = meta["max_abs_diff"].as_f64().unwrap();
    assert!(diff < 1e-6, "numeric vs full-time closed form: {diff}");
    assert_eq!(meta["methods"][1], "closed_form:vrs_fulltime");
    assert!(meta["ewspec_version"].is_string());
    assert!(meta["generated_unix_seconds"].is_u64());
}

#[test]
fn sidecar_reruns_to_the_same_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "vrs.toml", RESONANT_JC);
    let first = tmp.path().join("first");
    assert!(run_spectrum(&cfg, &first).status.success());
    let again = tmp.path().join("again");
    let out = run_spectrum(first.join("vrs.json").to_str().unwrap(), &again);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(first.join("vrs.csv")).unwrap(),
        fs::read(again.join("vrs.csv")).unwrap()
    );
}

#[test]
fn period_sweep_adds_a_time_column() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "sweep.toml",
        r#"
model = "DJC"
[params]
omega0 = 0.125
selective = { m = 1 }
deformation = { kind = "linear_kerr", chi = 0.0125 }
[state]
kind = "fock_excited"
n = 1
[time]
sweep_periods = [2.0, 4.0]
[spectrum]
points = 101
[output]
name = "sweep"
"#,
    );
    let out = run_spectrum(&cfg, tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,omega,S");
    assert_eq!(csv.lines().count(), 1 + 2 * 101);
    let meta = sidecar(&tmp.path().join("sweep.json"));
    let tau = meta["rabi_period"].as_f64().unwrap();
    let times: Vec<f64> = serde_json::from_value(meta["observation_times"].clone()).unwrap();
    assert_eq!(times.len(), 2);
    assert!((times[1] - 4.0 * tau).abs() < 1e-9 * tau);
}

#[test]
fn eigensweep_writes_levels_per_coupling() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "eig.toml",
        r#"
model = "Rabi"
[params]
omega0 = 0.0
[sweep]
coupling_min = 0.0
coupling_max = 0.1
points = 5
levels = 4
[output]
name = "eig"
"#,
    );
    let out = ewspec(&["--out", tmp.path().to_str().unwrap(), "eigensweep", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("eig.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "coupling,E0,E1,E2,E3,cutoff");
    let first: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    // Uncoupled levels with the ω_c/2 zero point: 0, 1, 1, 2.
    for (e, want) in first[1..5].iter().zip([0.0, 1.0, 1.0, 2.0]) {
        assert!((e - want).abs() < 1e-12, "{first:?}");
    }
}

#[test]
fn correlation_run_compares_with_the_kernel() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "corr.toml",
        r#"
model = "DJC"
method = "both"
[params]
omega0 = 0.25
omega_c = 0.9
deformation = { kind = "linear_kerr", chi = 0.05 }
[state]
kind = "fock_excited"
n = 2
[time]
periods = 4.0
[correlation]
samples = 12
[output]
name = "corr"
"#,
    );
    let out = ewspec(&["--out", tmp.path().to_str().unwrap(), "correlation", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = sidecar(&tmp.path().join("corr.json"));
    assert!(meta["max_abs_diff"].as_f64().unwrap() < 1e-8);
    let csv = fs::read_to_string(tmp.path().join("corr.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 144);
}

#[test]
fn empty_omega_grid_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.toml",
        "model = \"JC\"\n[params]\nomega0 = 0.25\n[spectrum]\npoints = 0\n",
    );
    let out = run_spectrum(&cfg, tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("empty"), "{err}");
    assert!(!tmp.path().join("scenario.csv").exists());
}

#[test]
fn unknown_figure_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ewspec(&["--out", tmp.path().to_str().unwrap(), "figure", "fig9z"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig9z"));
}

#[test]
fn missing_config_file_is_an_error() {
    let out = ewspec(&["spectrum", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(2));
}
