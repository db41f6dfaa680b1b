use std::process::{Command, Output};

fn isoslice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoslice"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn missing_seed_is_malformed() {
    let out = isoslice(&["verify", "--ids", "eq3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn unknown_inputs_are_malformed() {
    assert_eq!(
        isoslice(&["--seed", "1", "verify", "--ids", "eq99"]).status.code(),
        Some(2)
    );
    assert_eq!(isoslice(&["gen", "torus:3"]).status.code(), Some(2));
    assert_eq!(
        isoslice(&["--seed", "1", "--threads", "0", "verify", "--ids", "eq3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn exact_checks_pass_with_zero_exit() {
    let out = isoslice(&["--seed", "1", "verify", "--ids", "eq3,eq4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
}

#[test]
fn generated_bodies_feed_other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let body = dir.path().join("cube.json");
    let gen = isoslice(&["gen", "cube:2"]);
    assert!(gen.status.success());
    std::fs::write(&body, &gen.stdout).unwrap();
    let report = dir.path().join("lk.json");
    let lk = isoslice(&[
        "--seed",
        "3",
        "--out",
        report.to_str().unwrap(),
        "lk",
        "--body",
        body.to_str().unwrap(),
    ]);
    assert!(lk.status.success(), "{}", String::from_utf8_lossy(&lk.stderr));
    let csv = isoslice(&["render", report.to_str().unwrap()]);
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("check,subject,pass"));
    assert_eq!(text.lines().count(), 2);
}
