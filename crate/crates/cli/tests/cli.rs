use std::process::{Command, Output};

use unclone_cli::report::json_body;

fn unclone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unclone")).args(args).output().unwrap()
}

fn body(out: &Output) -> serde_json::Value {
    json_body(&String::from_utf8_lossy(&out.stdout)).expect("json report")
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(unclone(&["--help"]).status.code(), Some(0));
    assert_eq!(unclone(&["coin", "demo"]).status.code(), Some(1), "seed is required");
    assert_eq!(unclone(&["coin", "demo", "--seed", "1", "--variant", "bogus"]).status.code(), Some(1));
    assert_eq!(unclone(&["purify", "type-haar", "--method", "monte-carlo"]).status.code(), Some(1));
}

#[test]
fn report_shape() {
    let out = unclone(&["mini", "demo", "--seed", "4", "--trials", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let full: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(full["wall_time_s"].is_f64());
    let b = body(&out);
    assert_eq!(b["seed"], 4);
    assert_eq!(b["config"]["trials"], 50);
    assert_eq!(b["status"], "pass");
    assert!(b["artifact_version"].is_string());
}

#[test]
fn config_file_supplies_defaults() {
    let path = std::env::temp_dir().join(format!("unclone-cli-test-{}.conf", std::process::id()));
    std::fs::write(&path, "# mini run\nseed = 9\ntrials = 30\n").unwrap();
    let p = path.to_str().unwrap();
    let from_file = body(&unclone(&["mini", "demo", "--config", p]));
    let explicit = body(&unclone(&["mini", "demo", "--seed", "9", "--trials", "30"]));
    assert_eq!(from_file, explicit);
    let overridden = body(&unclone(&["mini", "demo", "--config", p, "--trials", "10"]));
    assert_eq!(overridden["config"]["trials"], 10);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn csv_output() {
    let out = unclone(&["--format", "csv", "prs", "sample", "--seed", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("body.status,pass"));
}

#[test]
fn detsig_vectors_are_byte_identical() {
    let dir = std::env::temp_dir();
    let a = dir.join(format!("unclone-vec-a-{}.json", std::process::id()));
    let b = dir.join(format!("unclone-vec-b-{}.json", std::process::id()));
    for p in [&a, &b] {
        let out = unclone(&["detsig", "vectors", "--n", "8", "--seed", "1", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    assert!(!String::from_utf8_lossy(&x).contains("wall_time_s"));
    std::fs::remove_file(a).unwrap();
    std::fs::remove_file(b).unwrap();
}
