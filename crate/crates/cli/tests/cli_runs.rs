use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn holobeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holobeam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn status_line(bytes: &[u8]) -> Value {
    let text = String::from_utf8_lossy(bytes);
    let line = text.lines().last().expect("one status line");
    serde_json::from_str(line).expect("status line is JSON")
}

fn scenario() -> String {
    format!("{}/../../configs/reference.toml", env!("CARGO_MANIFEST_DIR"))
}

fn run_focused(out: &Path, extra: &[&str]) -> Output {
    let config = scenario();
    let mut args = vec!["--config", &config, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["run", "--beam", "focused"]);
    holobeam(&args)
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "[rhs]\nfrequencyy = 1e9\n").unwrap();
    let out = holobeam(&["--config", path.to_str().unwrap(), "config"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let status = status_line(&out.stderr);
    assert_eq!(status["status"], "error");
    assert_eq!(status["kind"], "config");
    assert!(status["message"].as_str().unwrap().contains("frequencyy"));
}

#[test]
fn invalid_value_is_reported_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_focused(dir.path(), &["--set", "rhs.frequency=-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(status_line(&out.stderr)["status"], "error");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = holobeam(&["--config", "/nonexistent/scenario.toml", "config"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(status_line(&out.stderr)["kind"], "io");
}

#[test]
fn bad_arguments_are_usage_errors() {
    let out = holobeam(&["repro", "fig5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(status_line(&out.stderr)["kind"], "usage");
}

#[test]
fn explicit_scenario_matches_builtin() {
    let builtin = holobeam(&["config"]);
    let explicit = holobeam(&["--config", &scenario(), "config"]);
    assert!(builtin.status.success() && explicit.status.success());
    assert_eq!(builtin.stdout, explicit.stdout);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_focused(a.path(), &[]);
    let second = run_focused(b.path(), &[]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(second.status.success());
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 3);
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs between runs");
    }
}

#[test]
fn outputs_carry_the_config_digest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_focused(dir.path(), &[]);
    let status = status_line(&out.stdout);
    let digest = status["config_sha256"].as_str().unwrap().to_owned();
    assert_eq!(digest.len(), 64);
    let files = status["files"].as_array().unwrap();
    assert!(!files.is_empty());
    for file in files {
        let path = file.as_str().unwrap();
        let bytes = fs::read(path).unwrap();
        let text = String::from_utf8_lossy(&bytes);
        if path.ends_with(".json") {
            let doc: Value = serde_json::from_str(&text).unwrap();
            assert_eq!(doc["config_sha256"], digest.as_str());
            assert_eq!(doc["config"]["scene"]["user"][1], 2.4);
        } else if path.ends_with(".csv") {
            assert_eq!(text.lines().next().unwrap(), format!("# config_sha256 = {digest}"));
        } else {
            assert!(path.ends_with(".pgm"));
            assert!(text.starts_with(&format!("P5\n# config_sha256 = {digest}\n")));
        }
    }
}

#[test]
fn overrides_change_the_scenario_and_digest() {
    let base = holobeam(&["config"]);
    let moved = holobeam(&["--set", "scene.user=[-0.2, 2.0]", "config"]);
    assert!(moved.status.success());
    let toml = String::from_utf8(moved.stdout.clone()).unwrap();
    assert!(toml.contains("user = [-0.2, 2.0]"));
    assert_ne!(base.stdout, moved.stdout);

    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let d1 = status_line(&run_focused(a.path(), &[]).stdout)["config_sha256"].clone();
    let d2 = status_line(&run_focused(b.path(), &["--set", "scene.user=[-0.2, 2.0]"]).stdout)["config_sha256"].clone();
    assert_ne!(d1, d2);
}

#[test]
fn sweep_writes_one_row_per_depth() {
    let dir = tempfile::tempdir().unwrap();
    let out = holobeam(&["--out", dir.path().to_str().unwrap(), "--workers", "2", "sweep", "user_z"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("sweep_user_z.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].starts_with("z_r,beam,"));
    // two holographic spacings, the phase-only array and the focused beam at five depths
    assert_eq!(rows.len() - 1, 5 * 4);
}
