use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(command: &str, config: &Path, out: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_grect"));
    cmd.arg(command).arg("--config").arg(config).arg("--out").arg(out);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_prints_value_and_writes_artifacts() {
    let out = tempfile::tempdir().unwrap();
    let o = run("solve", &configs().join("solve_expectation.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("tree 0: I0 = 0.25"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("solve.json")).unwrap()).unwrap();
    assert_eq!(json["trees"][0]["value"], serde_json::json!(0.25));
    assert!(out.path().join("solve_iterations.csv").exists());
}

#[test]
fn beta_out_of_range_is_rejected() {
    let out = tempfile::tempdir().unwrap();
    let o = run("solve", &configs().join("invalid/beta_out_of_range.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: BETA_RANGE:"), "{}", stderr(&o));
}

#[test]
fn linear_checks_pass() {
    let out = tempfile::tempdir().unwrap();
    let o = run("check", &configs().join("check_linear.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("checks.json")).unwrap()).unwrap();
    assert_eq!(json["all_pass"], serde_json::json!(true));
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"beta": 0.9, "states": ["a", "b"], "gamma": 1,
            "i_plus_one": {"kind": "expectation", "prior": [0.5, 0.5]},
            "solve": {"trees": [{"depth": 1, "leaves": [1, 0]}]}}"#,
    );
    let o = run("solve", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("UNKNOWN_KEY"), "{}", stderr(&o));
}

#[test]
fn randomized_check_needs_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"beta": 0.9, "states": ["a", "b"],
            "i_plus_one": {"kind": "expectation", "prior": [0.5, 0.5]},
            "check": {"checks": [{"must_pass": true,
                "test": {"kind": "cross_solver", "depth": 2, "samples": 10}}]}}"#,
    );
    let o = run("check", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("MISSING_SEED"), "{}", stderr(&o));
}

#[test]
fn failing_must_pass_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"beta": 0.9, "states": ["a", "b"], "seed": 1,
            "i_plus_one": {"kind": "maxmin", "priors": [[0.4, 0.6], [0.6, 0.4]]},
            "check": {"checks": [{"name": "wrong-pair", "must_pass": true,
                "test": {"kind": "rectangularity",
                         "i0": {"kind": "product_expectation", "prior": [0.5, 0.5]},
                         "depth": 2, "trees": [{"depth": 2, "leaves": [1, 0, 0, 0]}]}}]}}"#,
    );
    let out = dir.path().join("out");
    let o = run("check", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL wrong-pair"));
    assert!(out.join("checks.json").exists());
}

#[test]
fn missing_tree_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"beta": 0.9, "states": ["a", "b"],
            "i_plus_one": {"kind": "expectation", "prior": [0.5, 0.5]},
            "solve": {"plans": [{"file": "nowhere.json"}]}}"#,
    );
    let o = run("solve", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("MISSING_FILE"), "{}", stderr(&o));
}

#[test]
fn leaf_cap_comes_from_environment() {
    let out = tempfile::tempdir().unwrap();
    let o = run("solve", &configs().join("solve_expectation.json"), out.path(), &[("RECT_MAX_LEAVES", "2")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("CAP_EXCEEDED"), "{}", stderr(&o));
    let o = run("solve", &configs().join("solve_expectation.json"), out.path(), &[("RECT_MAX_LEAVES", "many")]);
    assert!(stderr(&o).contains("INVALID_ENV"), "{}", stderr(&o));
}

#[test]
fn command_must_match_config() {
    let out = tempfile::tempdir().unwrap();
    let o = run("check", &configs().join("solve_expectation.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("COMMAND_MISMATCH"), "{}", stderr(&o));
}

#[test]
fn shipped_configs_load() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let loaded = grect::config::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(loaded.config.command.is_some(), "{}", path.display());
        }
    }
}
