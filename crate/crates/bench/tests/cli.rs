use std::path::PathBuf;
use std::process::{Command, Output};

fn mlea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlea")).args(args).output().unwrap()
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).to_str().unwrap().to_string()
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mlea-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(mlea(&["--help"]).status.code(), Some(0));
    assert_eq!(mlea(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(mlea(&["lea-run"]).status.code(), Some(1));
    assert_eq!(mlea(&["lea-run", "--config", "/nonexistent/x.json"]).status.code(), Some(1));
}

#[test]
fn invalid_config_names_the_field() {
    let dir = scratch("invalid");
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{"seed":1,"d":4,"T":0,"l":1,"learner":"erfi","scenario":{"type":"adversary","kind":"uniform_diag"}}"#,
    )
    .unwrap();
    let out = mlea(&["lea-run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("T:"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn lea_run_writes_its_outputs() {
    let dir = scratch("run");
    let out = mlea(&["lea-run", "--config", &config("lea_greedy_mixed_d16.json"), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trace.csv", "summary.json", "config.json"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["final_regret"], 0.0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn seed_flag_overrides_the_config() {
    let cfg = config("lea_greedy_subsystem_d16.json");
    let a = mlea(&["lea-run", "--config", &cfg, "--csv", "--seed", "5"]);
    let b = mlea(&["lea-run", "--config", &cfg, "--csv", "--seed", "6"]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn bound_table_without_config() {
    let out = mlea(&["bound-table"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).lines().count() > 2);
}
