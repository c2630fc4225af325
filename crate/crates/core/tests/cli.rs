use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn cmcflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmcflow")).args(args).env("CMCFLOW_SEED", "3").output().expect("spawn cmcflow")
}

fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn flow_converges_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let history = dir.path().join("out/history.csv");
    let summary = dir.path().join("out/summary.json");
    let cfg = write(
        dir.path(),
        "flow.json",
        &json!({
            "model": {"kind": "euclidean"},
            "surface": {"sphere": {"radius": 10, "perturb": [[2, 0, 0.05]], "L_max": 8}},
            "flow": {"diag_every": 10},
            "outputs": {"history_csv": history, "summary_json": summary, "checkpoint_dir": dir.path().join("ck"), "checkpoint_every": 50}
        }),
    );
    let out = cmcflow(&["flow", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["status"], "converged");
    let csv = std::fs::read_to_string(&history).unwrap();
    assert!(csv.starts_with("step,t,dt,area"));
    assert!(csv.lines().count() > 2);
    let s: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert!(s["final_deviation_linf"].as_f64().unwrap() <= 1e-8);
    assert!(dir.path().join("ck/surface_00000000.json").exists());
}

#[test]
fn configuration_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = write(dir.path(), "a.json", &json!({"model": {"kind": "euclidean"}}));
    assert_eq!(code(&cmcflow(&["flow", missing.to_str().unwrap()])), 1);
    let bad_cfl = write(
        dir.path(),
        "b.json",
        &json!({"model": {"kind": "euclidean"}, "surface": {"sphere": {"radius": 5}}, "flow": {"cfl": 3.0}}),
    );
    assert_eq!(code(&cmcflow(&["flow", bad_cfl.to_str().unwrap()])), 1);
    assert_eq!(code(&cmcflow(&["flow", dir.path().join("nope.json").to_str().unwrap()])), 1);
    assert_eq!(code(&cmcflow(&["bogus"])), 1);
    let radii = write(dir.path(), "c.json", &json!({"model": {"kind": "schwarzschild", "m": 1}, "radii": [20, 15]}));
    assert_eq!(code(&cmcflow(&["foliate", radii.to_str().unwrap()])), 1);
}

#[test]
fn horizon_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "flow.json",
        &json!({
            "model": {"kind": "euclidean"},
            "surface": {"sphere": {"radius": 10, "perturb": [[2, 0, 0.2]], "L_max": 8}},
            "flow": {"t_max": 5.0}
        }),
    );
    let out = cmcflow(&["flow", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let s = stdout_json(&out);
    assert_eq!(s["status"], "horizon_reached");
    assert!((s["final_t"].as_f64().unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn lost_roundness_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "flow.json",
        &json!({
            "model": {"kind": "schwarzschild", "m": 1},
            "surface": {"sphere": {"radius": 20, "perturb": [[2, 0, 0.5]], "L_max": 8}},
            "flow": {"t_max": 10.0, "class_params": {"sigma": 20, "B1": 1e-6, "B2": 1e-6, "Bcen": 1e-6}}
        }),
    );
    let out = cmcflow(&["flow", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert_eq!(stdout_json(&out)["status"], "class_exit");
}

#[test]
fn geometry_failure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "flow.json",
        &json!({"model": {"kind": "schwarzschild", "m": 1}, "surface": {"sphere": {"radius": 0.4, "L_max": 8}}}),
    );
    let out = cmcflow(&["flow", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    assert_eq!(stdout_json(&out)["status"], "graph_failure");
}

#[test]
fn ambient_checks() {
    let dir = tempfile::tempdir().unwrap();
    let schw = write(dir.path(), "s.json", &json!({"kind": "schwarzschild", "m": 2}));
    let adm = cmcflow(&["ambient", schw.to_str().unwrap(), "--check", "adm"]);
    assert_eq!(code(&adm), 0);
    assert!((stdout_json(&adm)["value"].as_f64().unwrap() - 2.0).abs() < 2e-3);
    assert_eq!(code(&cmcflow(&["ambient", schw.to_str().unwrap(), "--check", "decay"])), 0);
    assert_eq!(code(&cmcflow(&["ambient", schw.to_str().unwrap(), "--check", "rt"])), 0);

    let odd = write(
        dir.path(),
        "odd.json",
        &json!({"model": {"kind": "perturbed_schwarzschild", "m": 1, "delta": 0.5,
            "perturbation": {"amplitude": 0.5, "decay": 1.0, "modes": [[1, 0, 0]], "parity": "odd"}}}),
    );
    let rt = cmcflow(&["ambient", odd.to_str().unwrap(), "--check", "rt"]);
    assert_eq!(code(&rt), 2, "{}", String::from_utf8_lossy(&rt.stderr));
    assert_eq!(stdout_json(&rt)["pass"], false);
}

#[test]
fn spectrum_of_flat_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let eigs = dir.path().join("eig.csv");
    let cfg = write(
        dir.path(),
        "spec.json",
        &json!({"model": {"kind": "euclidean"}, "surface": {"sphere": {"radius": 10, "L_max": 8}}, "k": 9,
            "outputs": {"eigenfunctions_csv": eigs}}),
    );
    let out = cmcflow(&["spectrum", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let lambdas: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(lambdas.len(), 9);
    assert!((lambdas[1] - 0.02).abs() < 1e-10 && (lambdas[8] - 0.06).abs() < 1e-10);
    assert!(eigs.exists());
}

#[test]
fn foliate_nests_leaves() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let cfg = write(
        dir.path(),
        "fol.json",
        &json!({"model": {"kind": "schwarzschild", "m": 1}, "radii": [10, 14], "L_max": 8,
            "outputs": {"report_json": report, "leaf_dir": dir.path().join("leaves")}}),
    );
    let out = cmcflow(&["foliate", cfg.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["nested"], true);
    assert!(report.exists());
    assert!(dir.path().join("leaves/leaf_r10.json").exists());
}
