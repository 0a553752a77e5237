//! End-to-end tests of the `facetforge` binary: exit codes, JSON output and
//! seeding.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use facetforge::Mesh;
use serde_json::Value;

const CUBE: &str = r#"{"normals": [[1,0,0],[-1,0,0],[0,1,0],[0,-1,0],[0,0,1],[0,0,-1]], "areas": [1,1,1,1,1,1]}"#;

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    run_with_env(args, stdin, &[])
}

fn run_with_env(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_facetforge"));
    cmd.args(args).env_remove("FACETFORGE_SEED").stdout(Stdio::piped()).stderr(Stdio::piped());
    cmd.stdin(if stdin.is_some() { Stdio::piped() } else { Stdio::null() });
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().expect("binary runs");
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"], None)), 0);
    assert_eq!(code(&run(&["--version"], None)), 0);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(&["bogus"], None)), 64);
    assert_eq!(code(&run(&["tetra", "solve"], None)), 64);
    assert_eq!(code(&run(&["shrink", "--areas", "1,x,2", "--target", "0.1"], None)), 64);
    assert_eq!(code(&run(&["minkowski", "solve", "--input", "-"], Some("{not json"))), 64);
    assert_eq!(code(&run(&["minkowski", "solve", "--input", "/nonexistent/data.json"], None)), 64);
}

#[test]
fn cube_solve_round_trips_through_off() {
    let dir = tempfile::tempdir().unwrap();
    let off = dir.path().join("cube.off");
    let out = run(
        &["-q", "minkowski", "solve", "--input", "-", "--off", off.to_str().unwrap(), "--off-exact"],
        Some(CUBE),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    let volume = report["volume"].as_f64().unwrap();
    assert!((volume - 1.0).abs() <= 1e-12, "{volume}");
    assert!(out.stderr.is_empty(), "quiet run wrote to stderr");

    let mesh = Mesh::from_off(&std::fs::read_to_string(&off).unwrap()).unwrap();
    assert_eq!(mesh.facets.len(), 6);
    assert!((mesh.volume - volume).abs() <= 1e-14);
}

#[test]
fn solved_mesh_json_feeds_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let solved = run(&["-q", "minkowski", "solve", "--input", "-"], Some(CUBE));
    let path = dir.path().join("cube.json");
    std::fs::write(&path, &solved.stdout).unwrap();
    let out = run(&["-q", "oracle", "mc", "--mesh", path.to_str().unwrap(), "--samples", "20000"], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let est = json(&out)["estimate"]["estimate"].as_f64().unwrap();
    assert!((est - 1.0).abs() <= 1e-12, "a box fills its bounding box: {est}");
}

#[test]
fn infeasible_input_exits_2_with_a_report() {
    let flat = r#"{"normals": [[1,0,0],[-1,0,0],[0,1,0],[0,-1,0]], "areas": [1,1,1,1]}"#;
    let out = run(&["-q", "minkowski", "check", "--input", "-"], Some(flat));
    assert_eq!(code(&out), 2);
    let body = json(&out);
    assert_eq!(body["status"], "infeasible");
    assert!(body["report"].is_object());

    let out = run(&["-q", "tetra", "solve", "--areas", "0.1,0.1,0.1,0.9"], None);
    assert_eq!(code(&out), 2);
    let body = json(&out);
    assert_eq!(body["report"]["hypotheses"]["sum_ok"], false);
}

#[test]
fn exact_print_writes_seventeen_digits() {
    let args = ["-q", "noneuclid", "h", "--t", "2", "--s", "0.5"];
    let plain = json(&run(&args, None));
    let exact_out = run(&[&["--exact-print"][..], &args[..]].concat(), None);
    let text = String::from_utf8_lossy(&exact_out.stdout).to_string();
    assert!(text.contains("e0") || text.contains("e-"), "{text}");
    let exact: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(plain["h"].as_f64(), exact["h"].as_f64());
}

#[test]
fn seed_comes_from_the_environment() {
    let args = ["-q", "oracle", "mc", "--needle", "0.3", "--samples", "5000"];
    let a = json(&run_with_env(&args, None, &[("FACETFORGE_SEED", "7")]));
    let b = json(&run_with_env(&args, None, &[("FACETFORGE_SEED", "7")]));
    let c = json(&run_with_env(&args, None, &[("FACETFORGE_SEED", "8")]));
    let flag = json(&run_with_env(&[&["--seed", "7"][..], &args[..]].concat(), None, &[("FACETFORGE_SEED", "8")]));
    assert_eq!(a, b);
    assert_ne!(a["estimate"], c["estimate"]);
    assert_eq!(a, flag, "the flag overrides the environment");
    assert_eq!(a["seed"], 7);
}

#[test]
fn tetra_solve_reports_a_verified_solution() {
    let out = run(&["-q", "tetra", "solve", "--areas", "0.3,0.5,0.4,0.2", "--geometry", "hyperbolic"], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let body = json(&out);
    for r in body["residuals"].as_array().unwrap() {
        assert!(r.as_f64().unwrap().abs() <= 1e-8);
    }
    assert_eq!(body["winding"], 1);
}
