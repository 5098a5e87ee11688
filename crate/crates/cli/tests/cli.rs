//! End-to-end runs of the `coquat` binary.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coquat_cli::report::{columns, read_csv, write_csv};
use serde_json::Value;
use tempfile::TempDir;

fn coquat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coquat")).args(args).output().expect("spawn coquat")
}

fn run(dir: &Path, file: &str, experiment: &str, set: &[&str]) -> (Output, PathBuf) {
    let out = dir.join(file);
    let mut args = vec!["run", "--experiment", experiment, "--out", out.to_str().unwrap()];
    for s in set {
        args.extend(["--set", s]);
    }
    (coquat(&args), out)
}

fn rows(path: &Path) -> Vec<coquat_cli::Row> {
    read_csv(std::fs::File::open(path).unwrap()).unwrap()
}

fn sidecar(path: &Path) -> Value {
    let mut p = path.as_os_str().to_owned();
    p.push(".meta.json");
    serde_json::from_str(&std::fs::read_to_string(PathBuf::from(p)).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn sphere_kernel_at_eps_one_is_minus_pi_squared() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), "sk.csv", "sphere-kernel-integral", &["eps=1", "radii=1,2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = rows(&out);
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let v = r.value.unwrap().z[0];
        assert!((v.re + PI * PI).abs() < 1e-6 * PI * PI, "{v}");
        assert!(r.abs_error.unwrap() < 1e-6 * PI * PI);
        assert_eq!(r.epsilon, Some(1.0));
    }
}

#[test]
fn tolerance_failure_exits_one() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), "sk.csv", "sphere-kernel-integral", &["eps=1", "radii=1", "res=8,4,4"]);
    assert_eq!(code(&o), 1);
    // the data is still written, and the sidecar records the failure
    assert_eq!(rows(&out).len(), 1);
    let meta = sidecar(&out);
    assert_eq!(meta["summary"]["failed"], 1);
    assert_eq!(meta["cases"][0]["pass"], false);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), "x.csv", "sphere-kernel-integral", &["no_such_key=1"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("no_such_key"), "{err}");
    assert!(!out.exists());

    assert_eq!(code(&run(dir.path(), "x.csv", "no-such-experiment", &[]).0), 2);
    assert_eq!(code(&run(dir.path(), "x.csv", "sphere-kernel-integral", &["eps=abc"]).0), 2);
    assert_eq!(code(&run(dir.path(), "x.csv", "fueter-regularized", &["surface=torus"]).0), 2);
    assert_eq!(code(&run(dir.path(), "x.csv", "eps-sweep", &["eps=0.1,0.2"]).0), 2);
    assert_eq!(code(&coquat(&["run", "--config", "/nonexistent/config.toml"])), 2);
    assert_eq!(code(&coquat(&["run", "--bogus-flag"])), 2);
    assert_eq!(code(&coquat(&["run", "--experiment", "eps-sweep"])), 2);
}

#[test]
fn config_file_with_command_line_override() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("from-file.csv");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!("experiment = \"sphere-kernel-integral\"\nout = {:?}\neps = [0.5, 0.25]\nradii = [1.0]\n", out),
    )
    .unwrap();
    let o = coquat(&["run", "--config", cfg.to_str().unwrap(), "--set", "radii=2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ids: Vec<String> = rows(&out).into_iter().map(|r| r.case_id).collect();
    assert_eq!(ids, ["r2-eps0.5", "r2-eps0.25"]);
    let params = &sidecar(&out)["config"]["parameters"];
    assert_eq!(params["radii"], serde_json::json!([2.0]));
    assert_eq!(params["eps"], serde_json::json!([0.5, 0.25]));

    std::fs::write(&cfg, "experiment = \"sphere-kernel-integral\"\nout = \"x.csv\"\nunknown = 3\n").unwrap();
    assert_eq!(code(&coquat(&["run", "--config", cfg.to_str().unwrap()])), 2);
}

fn without_wall_ms(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn runs_are_reproducible_up_to_timing() {
    let dir = TempDir::new().unwrap();
    let set = ["samples=40", "seed=11"];
    let (a, out_a) = run(dir.path(), "a.csv", "restriction-lemma", &set);
    let (b, out_b) = run(dir.path(), "b.csv", "restriction-lemma", &set);
    assert_eq!((code(&a), code(&b)), (0, 0));
    assert_eq!(columns().last().unwrap(), "wall_ms");
    assert_eq!(without_wall_ms(&out_a), without_wall_ms(&out_b));

    let set = ["samples=500", "seed=3"];
    let (a, out_a) = run(dir.path(), "c.csv", "algebra-identities", &set);
    let (b, out_b) = run(dir.path(), "d.csv", "algebra-identities", &set);
    assert_eq!((code(&a), code(&b)), (0, 0));
    assert_eq!(without_wall_ms(&out_a), without_wall_ms(&out_b));
}

#[test]
fn csv_round_trips_through_the_reader() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), "t.csv", "theta-distribution", &["n=1,2", "eps=0.1,-0.01"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = rows(&out);
    // two ε values and two boundary values per n
    assert_eq!(rows.len(), 8);
    let mut again = Vec::new();
    write_csv(&rows, &mut again).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), std::fs::read_to_string(&out).unwrap());
}

#[test]
fn json_output_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), "r.json", "region-classify", &["grid=16,16,16"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["config"]["experiment"], "region-classify");
    assert_eq!(doc["config"]["format"], "json");
    let rows = doc["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    let keys: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, columns().iter().collect::<Vec<_>>());
    let margin = rows.iter().find(|r| r["case_id"] == "margin-origin").unwrap();
    assert_eq!(margin["value_e0_re"], 1.0);

    let meta = sidecar(&out);
    assert_eq!(meta["tool"], "coquat-cli");
    assert!(meta["version"].as_str().is_some_and(|v| !v.is_empty()));
    assert!(meta["timestamp"].as_str().is_some_and(|t| t.contains('T')));
    assert_eq!(meta["config"]["parameters"]["grid"], serde_json::json!([16, 16, 16]));
    assert_eq!(meta["columns"].as_array().unwrap().len(), columns().len());
    assert_eq!(meta["summary"]["cases"], rows.len());
    for case in meta["cases"].as_array().unwrap() {
        assert!(["closed-form", "oracle", "none"].contains(&case["provenance"].as_str().unwrap()));
    }
}

#[test]
fn classical_constant_vanishes_outside() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), "c.csv", "fueter-classical", &["x0=2,0,0,0,0,0.3,0.1,0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = rows(&out);
    assert_eq!(rows[0].case_id, "p00-out");
    assert!(rows[0].value.unwrap().euclid_norm() < 1e-6);
    // the inside point reproduces the constant
    assert_eq!(rows[1].case_id, "p01-in");
    assert!(rows[1].abs_error.unwrap() < 1e-6);
}

#[test]
fn eps_sweep_follows_the_model_and_extrapolates() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(dir.path(), "s.csv", "eps-sweep", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = rows(&out);
    assert_eq!(rows.len(), 5);
    for r in &rows[..4] {
        let eps = r.epsilon.unwrap();
        let model = r.reference.unwrap();
        assert!((model.z[0].re - 0.7 / (1.0 + eps * eps)).abs() < 1e-15);
        assert!(r.abs_error.unwrap() < 1e-6, "{r:?}");
    }
    let last = rows.last().unwrap();
    assert_eq!(last.case_id, "in-extrapolated");
    assert_eq!(last.epsilon, Some(0.0));
    assert!(last.abs_error.unwrap() < 1e-4);
}

#[test]
fn list_names_every_experiment() {
    let o = coquat(&["list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in coquat_cli::experiments::NAMES {
        assert!(text.lines().any(|l| l == name), "{name}");
    }
}
