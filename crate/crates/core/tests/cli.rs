use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_affine-energy"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const PASSING: &str = r#"{"name": "small", "seed": 9, "jobs": [
  {"id": "bp_square", "kind": "busemann_petty", "body": {"kind": "cube", "params": {"n": 2}},
   "params": {"lambda": 0.5, "p": 2}},
  {"id": "petty_square", "kind": "petty_projection", "body": {"kind": "cube", "params": {"n": 2}}}
]}"#;

#[test]
fn verify_all_pass_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", PASSING);
    let out_path = dir.path().join("out.json");
    let out = bin()
        .args(["verify", "--scenario", &scenario, "--out"])
        .arg(&out_path)
        .args(["--threads", "2"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let reports: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["id"], "bp_square");
    assert_eq!(reports[0]["seed"], 9);
    assert!(reports[0]["scenario_hash"].as_str().unwrap().starts_with("sha256:"));
    assert!(reports[0].get("wall_time_s").is_none());
}

#[test]
fn verify_csv_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", PASSING);
    let out = bin().args(["verify", "--scenario", &scenario, "--format", "csv", "--seed", "42"]).output().unwrap();
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("id,inequality,n,"));
    assert!(lines[1].contains(",42,"));
}

#[test]
fn failing_job_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // the disk is an equality case; quadrature leaves a deficit of about -6e-7
    let text = r#"{"jobs": [{"id": "forced", "kind": "busemann_petty",
        "body": {"kind": "ball", "params": {"n": 2, "radius": 1}},
        "params": {"lambda": 0.3, "p": 1.5, "tolerance": 0}}]}"#;
    let scenario = write(dir.path(), "s.json", text);
    let out = bin().args(["verify", "--scenario", &scenario]).output().unwrap();
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL forced"));
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", "{\"jobs\": [\n  {\"id\": \"x\", \"kind\": \"no_such_kind\"}\n]}");
    let out = bin().args(["verify", "--scenario", &scenario]).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let missing = bin().args(["verify", "--scenario", "/nonexistent/s.json"]).output().unwrap();
    assert_eq!(code(&missing), 2);
    let negative = write(dir.path(), "t.json", r#"{"jobs": [{"id": "neg", "kind": "petty_projection",
        "body": {"kind": "cube", "params": {"n": 2}}, "params": {"tolerance": -0.5}}]}"#);
    let out = bin().args(["verify", "--scenario", &negative]).output().unwrap();
    assert_eq!(code(&out), 2);
    let bad_flag = bin().args(["verify", "--bogus"]).output().unwrap();
    assert_eq!(code(&bad_flag), 2);
}

#[test]
fn domain_error_exits_three_and_names_job() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"jobs": [{"id": "sobolev_p_half", "kind": "affine_sobolev_p",
        "function": {"name": "gaussian", "grid": {"n": 2, "extent": 5, "h": 0.25}},
        "params": {"lambda": 0.5, "p": 0.5}}]}"#;
    let scenario = write(dir.path(), "s.json", text);
    let out = bin().args(["verify", "--scenario", &scenario]).output().unwrap();
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sobolev_p_half") && err.contains("(1, n)"), "{err}");
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", PASSING);
    let a = bin().args(["verify", "--scenario", &scenario]).env("AFFINE_ENERGY_THREADS", "1").output().unwrap();
    let b = bin().args(["verify", "--scenario", &scenario]).env("AFFINE_ENERGY_THREADS", "3").output().unwrap();
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn energy_and_body_commands() {
    let out = bin()
        .args(["energy", "--function", r#"{"name":"gaussian","grid":{"n":2,"extent":5,"h":0.0625}}"#, "--p", "2"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let e = v["energy"].as_f64().unwrap();
    assert!((e / std::f64::consts::PI.sqrt() - 1.0).abs() < 0.01);
    assert!((e / v["grad_norm"].as_f64().unwrap() - 1.0).abs() < 0.01);

    let sweep = bin()
        .args(["energy", "--function", r#"{"name":"two_bump","grid":{"n":2,"extent":3.5,"h":0.0625}}"#])
        .args(["--p", "1.5", "--lambda-sweep", "5", "--sphere-resolution", "128"])
        .output()
        .unwrap();
    assert_eq!(code(&sweep), 0);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&sweep.stdout).unwrap();
    assert_eq!(rows.len(), 5);
    let (e0, e4) = (rows[0]["energy"].as_f64().unwrap(), rows[4]["energy"].as_f64().unwrap());
    assert!((e0 / e4 - 1.0).abs() < 1e-10);

    let body = r#"{"kind":"cube","params":{"n":2,"r":1}}"#;
    let out = bin().args(["body", "--op", "petty-product", "--body", body]).output().unwrap();
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["petty_product"].as_f64().unwrap() - 8.0 / std::f64::consts::PI.powi(2)).abs() < 1e-2);

    let out = bin().args(["body", "--op", "banach-mazur", "--body", body]).output().unwrap();
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let bm = v["log_distance_upper"].as_f64().unwrap();
    assert!((bm / 2.0f64.sqrt().ln() - 1.0).abs() < 0.05, "{bm}");

    let out = bin().args(["body", "--op", "volume", "--body", r#"{"kind":"cube","params":{"n":2,"side":1}}"#]).output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn bundled_suite_passes() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/reference_suite.json");
    let out = bin().args(["verify", "--scenario", path]).output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}
