//! End-to-end checks of the binary: exit-code contract, report
//! determinism, CSV layout, and the config round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_homopt")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("homopt-test-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn validate_passes_on_the_synthesis_fixture() {
    let out = run(&["validate", config("ex4.json").to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn validate_rejects_a_wrong_degree() {
    let text = std::fs::read_to_string(config("ex4.json")).unwrap();
    let broken = text.replace("\"k\": 0", "\"k\": 1");
    let path = tmp_file("wrong-degree.json", &broken);
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("f-homogeneous-degree-k: FAIL"), "{stdout}");
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = run(&["validate", "definitely-not-here.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_json_is_a_usage_error() {
    let path = tmp_file("garbage.json", "{ this is not json");
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synthesize_rejects_theta_zero() {
    let out = run(&["synthesize", config("ex1.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not synthesizable"), "{stderr}");
}

#[test]
fn synthesize_reports_are_deterministic() {
    let cfg = config("ex4.json");
    let a = run(&["synthesize", cfg.to_str().unwrap(), "--json"]);
    let b = run(&["synthesize", cfg.to_str().unwrap(), "--json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(
        a.stdout, b.stdout,
        "same seed must give byte-identical reports"
    );
    let c = run(&["synthesize", cfg.to_str().unwrap(), "--json", "--seed", "7"]);
    assert_eq!(c.status.code(), Some(0));
    assert_ne!(
        a.stdout, c.stdout,
        "different seed must be visible in the report"
    );
}

#[test]
fn synthesize_report_carries_constants_and_pieces() {
    let out = run(&["synthesize", config("ex4.json").to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let data = &report["stages"][0]["data"];
    assert_eq!(data["kappa"], 11.0);
    assert_eq!(data["gamma0"]["coefficient"], 2.0);
    assert!(data["constants"]["rho_m"].as_f64().unwrap() > 0.0);
    assert_eq!(data["pieces"]["alpha_star"]["form"], "numeric");
    assert_eq!(data["pieces"]["E"]["form"], "expr");
}

#[test]
fn simulate_emits_the_fixed_csv_layout() {
    let dir = std::env::temp_dir().join(format!("homopt-sim-{}", std::process::id()));
    let out = run(&[
        "simulate",
        config("ex2.json").to_str().unwrap(),
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("traj_x0_custom.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,u,w1,y1,V,running_J");
    let first = lines.next().unwrap();
    // 17 significant digits in scientific notation
    assert!(
        first.starts_with("0.0000000000000000e0,1.0000000000000000e0,"),
        "{first}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reproduce_light_fixtures_pass() {
    for example in ["ex1", "ex2", "ex3"] {
        let out = run(&["reproduce", example]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{example}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
}

#[test]
fn reproduce_rejects_unknown_examples() {
    let out = run(&["reproduce", "ex9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_gain_asserts_inside_the_margin() {
    let out = run(&["sweep-gain", config("ex4.json").to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[reported]"), "{stdout}");
    assert!(stdout.contains("[ok]"), "{stdout}");
}

#[test]
fn report_config_echo_reruns_identically() {
    let out = run(&["validate", config("ex4.json").to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let echoed = serde_json::to_string_pretty(&report["config"]).unwrap();
    let path = tmp_file("echoed.json", &echoed);
    let again = run(&["validate", path.to_str().unwrap(), "--json"]);
    assert_eq!(again.status.code(), Some(0));
    let report2: serde_json::Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(report["stages"], report2["stages"]);
}
