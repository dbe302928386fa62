use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn gqcrb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gqcrb")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn qfi_lossless_phase_report() {
    let dir = TempDir::new().unwrap();
    let cfg =
        write(&dir, "c.json", r#"{"scenario":{"name":"phase-tmsv","insertion":"after-bs","parameters":{"r":1}}}"#);
    let report = dir.path().join("report.json");
    let out = gqcrb(&["qfi", s(&cfg), "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let f = v["F_sld"][0][0].as_f64().unwrap();
    assert!((f - 2f64.sinh().powi(2)).abs() < 1e-8 * f, "{f}");
    assert_eq!(v["rld_defined"], Value::Bool(false));
    assert!(v["F_rld"].is_null());
}

#[test]
fn qfi_displacement_bound_to_stdout() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"command":"qfi","scenario":{"name":"displacement-pair","parameters":{"nu_t":0.2,"r":0,"eps1":1,"eps2":1}}}"#,
    );
    let out = gqcrb(&["qfi", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["B_S"].as_f64().unwrap() - 0.7).abs() < 1e-9);
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"scenario": {"name": "phase-tmsv""#);
    let report = dir.path().join("report.json");
    let out = gqcrb(&["qfi", s(&cfg), "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("malformed-config"));
    assert!(!report.exists());

    let missing = gqcrb(&["qfi", s(&dir.path().join("absent.json"))]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("unreadable-config"));
}

#[test]
fn domain_error_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"scenario":{"name":"phase-tmsv","parameters":{"eps1":1.2}}}"#);
    let out = gqcrb(&["qfi", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error[domain-error]"));
}

fn header(csv: &str) -> Vec<String> {
    csv.lines().next().unwrap().split(',').map(String::from).collect()
}

#[test]
fn preset_columns() {
    let fig1 = gqcrb(&["sweep", "--preset", "fig1"]);
    assert_eq!(fig1.status.code(), Some(0), "{}", stderr(&fig1));
    let csv = String::from_utf8(fig1.stdout).unwrap();
    assert_eq!(header(&csv), ["r", "dphi2_before", "dphi2_after_e2_08", "dphi2_after_e2_10"]);
    assert_eq!(csv.lines().count(), 1 + 30);

    let fig3a = gqcrb(&["sweep", "--preset", "fig3a"]);
    let csv = String::from_utf8(fig3a.stdout).unwrap();
    assert_eq!(header(&csv), ["r", "B_S_single", "B_R_single", "B_S_tmsv", "B_R_tmsv"]);
    assert_eq!(csv.lines().count(), 1 + 31);
}

#[test]
fn minimal_sweep_has_two_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"scenario":{"name":"damping-temperature","parameters":{"xi":0.5,"N":0.9}},
            "sweep":{"param":"r","from":0.3,"to":1.0,"steps":2},"flavor":"both"}"#,
    );
    let out = gqcrb(&["sweep", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(header(&csv), ["r", "F_sld_trace", "F_rld_trace", "B_S", "B_R"]);
    assert_eq!(csv.lines().count(), 3);

    let json = gqcrb(&["sweep", s(&cfg), "--format", "json"]);
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_with_failed_points_warns() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"scenario":{"name":"phase-tmsv","insertion":"after-bs"},
            "sweep":{"param":"r","from":0.0,"to":1.0,"steps":3},"flavor":"both"}"#,
    );
    let out = gqcrb(&["sweep", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("0,"));
    assert!(stderr(&out).contains("warning:"));
    assert!(!csv.contains("warning"));
}

#[test]
fn invalid_sweep_spec_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"scenario":{"name":"phase-tmsv"},"sweep":{"param":"nu_t","from":0,"to":1,"steps":4}}"#,
    );
    assert_eq!(gqcrb(&["sweep", s(&cfg)]).status.code(), Some(2));
    let one_step =
        write(&dir, "d.json", r#"{"scenario":{"name":"phase-tmsv"},"sweep":{"param":"r","from":0,"to":1,"steps":1}}"#);
    assert_eq!(gqcrb(&["sweep", s(&one_step)]).status.code(), Some(2));
    assert_eq!(gqcrb(&["sweep", "--preset", "fig9"]).status.code(), Some(1));
}

#[test]
fn sweep_output_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"scenario":{"name":"squeeze-phase","parameters":{"nu_t":0.1,"s":0.3}},
            "sweep":{"param":"r","from":0,"to":1.2,"steps":25},"output":"unused.csv"}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(gqcrb(&["sweep", s(&cfg), "--out", s(&a)]).status.code(), Some(0));
    assert_eq!(gqcrb(&["sweep", s(&cfg), "--out", s(&b)]).status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn oracle_check_damping_tmsv_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"scenario":{"name":"damping-temperature","probe":"tmsv","parameters":{"xi":0.5,"N":0.9,"r":0.7}}}"#,
    );
    let out = gqcrb(&["oracle-check", s(&cfg), "--cutoff", "25"]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}{}", stderr(&out));
    assert!(text.contains("sld[1,1]") && text.contains("rld[0,1]"));
    assert!(text.lines().last().unwrap().starts_with("pass"));
}

#[test]
fn oracle_check_tolerance_failure_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"scenario":{"name":"damping-temperature","probe":"single","parameters":{"xi":0.5,"N":0.5,"r":0.3}},"flavor":"sld"}"#,
    );
    let out = gqcrb(&["oracle-check", s(&cfg), "--cutoff", "30", "--atol", "0", "--rtol", "1e-12"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout.clone()).unwrap().contains("FAIL"));
}

#[test]
fn oracle_check_pure_probe_rld() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"scenario":{"name":"phase-tmsv","parameters":{"r":0.5}},"flavor":"rld"}"#);
    let out = gqcrb(&["oracle-check", s(&cfg), "--cutoff", "20"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("rld-oracle-undefined"), "{}", stderr(&out));
}

#[test]
fn oracle_check_small_cutoff() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"scenario":{"name":"squeeze-phase","parameters":{"r":1,"nu_t":0.1}}}"#);
    let out = gqcrb(&["oracle-check", s(&cfg), "--cutoff", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("increase-cutoff"), "{}", stderr(&out));
}

#[test]
fn oracle_check_out_of_scope() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"scenario":{"name":"phase-tmsv","parameters":{"r":0.5}},"flavor":"sld"}"#);
    let out = gqcrb(&["oracle-check", s(&cfg), "--cutoff", "60"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("out-of-scope"));
}

#[test]
fn run_dispatches_on_command() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"command":"list-scenarios"}"#);
    let out = gqcrb(&["run", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    for name in ["phase-tmsv", "displacement-pair", "damping-temperature", "squeeze-phase", "fig3b"] {
        assert!(text.contains(name), "{name}");
    }
    let none = write(&dir, "d.json", r#"{"scenario":{"name":"phase-tmsv"}}"#);
    assert_eq!(gqcrb(&["run", s(&none)]).status.code(), Some(1));
    let mismatch = write(&dir, "e.json", r#"{"command":"sweep","scenario":{"name":"phase-tmsv"}}"#);
    assert_eq!(gqcrb(&["qfi", s(&mismatch)]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(gqcrb(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gqcrb(&["--help"]).status.code(), Some(0));
}
