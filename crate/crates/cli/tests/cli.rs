use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};
use tempfile::tempdir;

fn cbf(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_cbf"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    out.status.code().unwrap()
}

fn write_config(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

fn base() -> Value {
    json!({
        "n": 8, "mu": 1.0, "alpha": 0.0, "beta": 1.0, "r": 3.0, "t_end": 0.1, "dt": 0.02,
        "initial": {"kind": "taylor_green", "amplitude": 0.1},
        "checkpoint_every": 2
    })
}

#[test]
fn simulate_then_resume() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), "sim.json", &json!({"cbf_config_version": 1, "base": base()}));
    let out = dir.path().join("run");
    let out_s = out.to_string_lossy().into_owned();
    assert_eq!(cbf(&["simulate", "--config", &cfg, "--out", &out_s, "--deterministic", "--threads", "1"]), 0);
    for name in ["diagnostics.csv", "final.cbf", "manifest.json", "metadata.json", "scenario.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let ck = out.join("checkpoints/step_000002.cbf");
    let resumed = dir.path().join("resumed");
    let code = cbf(&[
        "resume", "--config", &cfg, "--out", &resumed.to_string_lossy(), "--checkpoint", &ck.to_string_lossy(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(fs::read(resumed.join("final.cbf")).unwrap(), fs::read(out.join("final.cbf")).unwrap());
}

#[test]
fn inequality_suite_command() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "suite.json",
        &json!({
            "cbf_config_version": 1,
            "suite": {"exponents": [2.0, 3.0], "pair_samples": 2000, "field_samples": 3,
                      "bracket_n": 8, "grad_l6_sizes": [8]}
        }),
    );
    let out = dir.path().join("suite");
    assert_eq!(cbf(&["inequality-suite", "--config", &cfg, "--out", &out.to_string_lossy()]), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("inequalities/monotonicity.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("o").to_string_lossy().into_owned();
    let bad_version = write_config(dir.path(), "v.json", &json!({"cbf_config_version": 2, "base": base()}));
    assert_eq!(cbf(&["simulate", "--config", &bad_version, "--out", &out]), 2);
    let unknown = write_config(dir.path(), "u.json", &json!({"cbf_config_version": 1, "base": base(), "extra": 1}));
    assert_eq!(cbf(&["simulate", "--config", &unknown, "--out", &out]), 2);
    let wrong_kind = write_config(
        dir.path(),
        "k.json",
        &json!({"cbf_config_version": 1, "kind": "certify", "base": base()}),
    );
    assert_eq!(cbf(&["simulate", "--config", &wrong_kind, "--out", &out]), 2);
    let ok = write_config(dir.path(), "ok.json", &json!({"cbf_config_version": 1, "base": base()}));
    assert_eq!(cbf(&["simulate", "--config", &ok]), 2, "no output directory");
    assert_eq!(cbf(&["simulate", "--config", &ok, "--out", &out, "--threads", "0"]), 2);
}

#[test]
fn blow_up_exits_3() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "blow.json",
        &json!({
            "cbf_config_version": 1,
            "base": {
                "n": 8, "mu": 0.01, "alpha": 0.0, "beta": 0.0, "r": 3.0, "t_end": 100.0, "dt": 0.5,
                "initial": {"kind": "random_divfree", "seed": 3, "slope": 1.0, "h1": 1e4},
                "tail_limit": 1.0
            }
        }),
    );
    let out = dir.path().join("o");
    assert_eq!(cbf(&["simulate", "--config", &cfg, "--out", &out.to_string_lossy()]), 3);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn missing_and_corrupt_files_exit_5() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("o").to_string_lossy().into_owned();
    let missing = dir.path().join("nope.json").to_string_lossy().into_owned();
    assert_eq!(cbf(&["simulate", "--config", &missing, "--out", &out]), 5);
    let cfg = write_config(dir.path(), "sim.json", &json!({"cbf_config_version": 1, "base": base()}));
    let ck = dir.path().join("bad.cbf");
    fs::write(&ck, b"XXXX0000").unwrap();
    assert_eq!(cbf(&["resume", "--config", &cfg, "--out", &out, "--checkpoint", &ck.to_string_lossy()]), 5);
}
