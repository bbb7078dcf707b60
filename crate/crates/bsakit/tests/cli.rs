//! End-to-end CLI tests: exit-code partition, report shape, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bsakit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bsakit"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

const ENTANGLED: &str = r#"{"v":1,"p":[0.7,0.1,0.1,0.1]}"#;
const SEPARABLE: &str = r#"{"v":1,"p":[0.4,0.3,0.2,0.1]}"#;

#[test]
fn concurrence_bd_report() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", ENTANGLED);
    let out = bsakit().arg("concurrence").arg(&state).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = stdout_json(&out);
    assert_eq!(rep["v"], 1);
    assert_eq!(rep["command"], "concurrence");
    let c = rep["outputs"]["concurrence"].as_f64().unwrap();
    assert!((c - 0.4).abs() < 1e-8);
    assert!(rep["inputs"]["state"].as_str().unwrap().len() == 64);
    assert!(rep["tolerances"]["cert"].as_f64().unwrap() > 0.0);
}

#[test]
fn concurrence_maximally_mixed() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", r#"{"v":1,"p":[0.25,0.25,0.25,0.25]}"#);
    let out = bsakit().arg("concurrence").arg(&state).output().unwrap();
    let rep = stdout_json(&out);
    assert_eq!(rep["outputs"]["concurrence"].as_f64().unwrap(), 0.0);
    assert_eq!(
        rep["outputs"]["entanglement_of_formation"].as_f64().unwrap(),
        0.0
    );
}

#[test]
fn malformed_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", "{not json");
    let out = bsakit().arg("concurrence").arg(&state).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_file_exits_2() {
    let out = bsakit()
        .arg("concurrence")
        .arg("/nonexistent/state.json")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_probabilities_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", r#"{"v":1,"p":[0.9,0.9,0.1,0.1]}"#);
    let out = bsakit().arg("concurrence").arg(&state).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn separable_command() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", SEPARABLE);
    let out = bsakit().arg("separable").arg(&state).output().unwrap();
    let rep = stdout_json(&out);
    assert_eq!(rep["outputs"]["separable"], true);

    let state = write(dir.path(), "e.json", ENTANGLED);
    let out = bsakit().arg("separable").arg(&state).output().unwrap();
    let rep = stdout_json(&out);
    assert_eq!(rep["outputs"]["separable"], false);
    assert!(rep["outputs"]["min_pt_eigenvalue"].as_f64().unwrap() < 0.0);
}

#[test]
fn lsd_with_verify_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", ENTANGLED);
    let out = bsakit()
        .args(["lsd", "--verify", "--oracle", "2000"])
        .arg(&state)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = stdout_json(&out);
    let lambda = rep["outputs"]["lambda"].as_f64().unwrap();
    assert!((lambda - 0.6).abs() < 1e-10);
    assert_eq!(rep["residuals"]["certificate"]["pass"], true);
    let gap = rep["residuals"]["oracle_gap"]["gap"].as_f64().unwrap();
    assert!(gap < 2e-3, "oracle gap {gap}");
    // p' emitted with the boundary normalization.
    let pp = rep["outputs"]["decomposition"]["p_prime"].as_array().unwrap();
    assert!((pp[0].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn lsd_separable_input_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", SEPARABLE);
    let out = bsakit().arg("lsd").arg(&state).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("max p_i"), "stderr: {err}");
}

const IDENTITY_MAP: &str = r#"{"v":1,
  "U_A":{"dim":2,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]},
  "U_B":{"dim":2,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]},
  "f_a":{"mu":1.0,"a":0.0,"m":[0.0,0.0,1.0]},
  "f_b":{"mu":1.0,"a":0.0,"m":[0.0,0.0,1.0]}}"#;

const PROJECTIVE_MAP: &str = r#"{"v":1,
  "U_A":{"dim":2,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]},
  "U_B":{"dim":2,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]},
  "f_a":{"mu":0.5,"a":1.0,"m":[0.0,0.0,1.0]},
  "f_b":{"mu":1.0,"a":0.0,"m":[0.0,0.0,1.0]}}"#;

#[test]
fn lqcc_identity_map() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", ENTANGLED);
    let map = write(dir.path(), "m.json", IDENTITY_MAP);
    let out = bsakit()
        .args(["lqcc", "--check-law"])
        .arg(&state)
        .arg(&map)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = stdout_json(&out);
    assert!((rep["outputs"]["success_probability"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let law = &rep["residuals"]["concurrence_law"];
    assert!((law["predicted"].as_f64().unwrap() - 0.4).abs() < 1e-9);
    assert!(law["residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn lqcc_transport_emits_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", ENTANGLED);
    let map = write(dir.path(), "m.json", IDENTITY_MAP);
    let out = bsakit()
        .args(["lqcc", "--transport"])
        .arg(&state)
        .arg(&map)
        .output()
        .unwrap();
    assert!(out.status.success());
    let rep = stdout_json(&out);
    assert_eq!(rep["residuals"]["transported_certificate"]["pass"], true);
    let lambda = rep["outputs"]["transported"]["lambda"].as_f64().unwrap();
    assert!((lambda - 0.6).abs() < 1e-10);
}

#[test]
fn lqcc_projective_transport_exits_6() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", ENTANGLED);
    let map = write(dir.path(), "m.json", PROJECTIVE_MAP);
    let out = bsakit()
        .args(["lqcc", "--transport"])
        .arg(&state)
        .arg(&map)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn random_deterministic_and_region() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let out = bsakit()
            .args(["random", "--count", "3", "--seed", "7", "--region", "entangled", "--out"])
            .arg(d.path())
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    for k in 0..3 {
        let a = std::fs::read(d1.path().join(format!("state_{k}.json"))).unwrap();
        let b = std::fs::read(d2.path().join(format!("state_{k}.json"))).unwrap();
        assert_eq!(a, b, "seeded outputs must be byte-identical");
        let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
        assert!(v["p"][0].as_f64().unwrap() > 0.5);
    }
}

#[test]
fn random_count_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bsakit()
        .args(["random", "--count", "0", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn random_unwritable_path_exits_2() {
    let out = bsakit()
        .args(["random", "--count", "1", "--out", "/nonexistent/dir"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_command() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", ENTANGLED);
    let out = bsakit()
        .args(["oracle", "--budget", "2000", "--seed", "0"])
        .arg(&state)
        .output()
        .unwrap();
    assert!(out.status.success());
    let rep = stdout_json(&out);
    let l = rep["outputs"]["best_lambda"].as_f64().unwrap();
    assert!((l - 0.6).abs() < 2e-3);
    assert_eq!(rep["seed"], 0);
}

#[test]
fn reports_identical_apart_from_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", ENTANGLED);
    let mut reps = Vec::new();
    for _ in 0..2 {
        let out = bsakit().arg("concurrence").arg(&state).output().unwrap();
        let mut rep = stdout_json(&out);
        rep["wall_time_ms"] = serde_json::json!(0);
        reps.push(rep);
    }
    assert_eq!(reps[0], reps[1]);
}

#[test]
fn tolerance_scale_env() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", ENTANGLED);
    let out = bsakit()
        .env("BSAKIT_TOLERANCE_SCALE", "10")
        .arg("concurrence")
        .arg(&state)
        .output()
        .unwrap();
    let rep = stdout_json(&out);
    assert!((rep["tolerances"]["cert"].as_f64().unwrap() - 1e-7).abs() < 1e-20);

    let out = bsakit()
        .env("BSAKIT_TOLERANCE_SCALE", "bogus")
        .arg("concurrence")
        .arg(&state)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dense_matrix_input() {
    let dir = tempfile::tempdir().unwrap();
    // Bell-diagonal rho for p = (0.7, 0.1, 0.1, 0.1) written densely.
    let body = r#"{"v":1,"dim":4,
      "re":[[0.4,0,0,0.3],[0,0.1,0,0],[0,0,0.1,0],[0.3,0,0,0.4]],
      "im":[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#;
    let state = write(dir.path(), "s.json", body);
    let out = bsakit().arg("lsd").arg(&state).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = stdout_json(&out);
    assert!((rep["outputs"]["lambda"].as_f64().unwrap() - 0.6).abs() < 1e-9);
}
