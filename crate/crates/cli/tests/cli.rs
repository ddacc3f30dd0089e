use serde_json::Value;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn reference_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/cusp6.toml")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn quotient_reports_strict_inequality() {
    let cfg = reference_config();
    let out = bnlab(&["quotient", "--lambda", "1.0", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["first_strict_j"].as_u64().is_some());
    let ratios = v["margin_ratio"].as_array().unwrap();
    assert_eq!(ratios.len(), 11);
    let last = ratios.last().unwrap().as_f64().unwrap();
    assert!((0.9..=1.1).contains(&last), "{last}");
}

#[test]
fn zero_lambda_control_passes() {
    let out = bnlab(&["quotient", "--lambda", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["first_strict_j"].is_null());
    assert!(v["margin_ratio"].as_array().unwrap().iter().all(Value::is_null));
}

#[test]
fn quotient_csv_schema() {
    let out = bnlab(&["quotient", "--out", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("j,eps,I1,I2,I3,I4_sigma,Q,bound,margin_ratio,err_est"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[1], "1.0000000000000001e-1");
    // 17 significant digits: one before the point, sixteen after.
    let mantissa = first[6].split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').len(), 18);
    assert_eq!(lines.count(), 10);
}

#[test]
fn ball_threshold_matches_quarter_eigenvalue() {
    let out = bnlab(&["ball", "--n", "3", "--threshold"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let t = v["threshold"].as_f64().unwrap();
    assert!((t / (PI * PI / 4.0) - 1.0).abs() < 0.01, "{t}");
    assert_eq!(v["reference"].as_f64().unwrap(), PI * PI / 4.0);
    assert!(v["relative_error"].as_f64().unwrap() < 0.01);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("relative error"), "{stderr}");
}

#[test]
fn ball_solve_relative_lambda() {
    let out = bnlab(&["ball", "--n", "4", "--lambda", "0.9", "--relative"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "solution");
    assert!((v["first_zero"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(v["residual"].as_f64().unwrap() < 1e-8);

    let out = bnlab(&["ball", "--n", "3", "--lambda", "0.1", "--relative"]);
    assert_eq!(json(&out)["status"], "no_solution");
}

#[test]
fn beta_outside_interval_is_a_config_error() {
    let cfg = reference_config();
    let out = bnlab(&["slopes", "--config", cfg.to_str().unwrap(), "--beta", "2.6"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("pβ < σ"), "{stderr}");
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(reference_config()).unwrap().replace("[domain]", "[domain]\nkapa = 2.0");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let out = bnlab(&["quotient", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kapa"));
}

#[test]
fn oversized_witness_balls_fail_the_domain_check() {
    let out = bnlab(&["check-domain", "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(reference_config())
        .unwrap()
        .replace("delta = 1.25", "delta = 6.0");
    let path = dir.path().join("wide.toml");
    std::fs::write(&path, text).unwrap();
    let out = bnlab(&["check-domain", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["verified"], false);
}

#[test]
fn reports_are_identical_across_runs_and_thread_counts() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (dir, jobs) in dirs.iter().zip(["1", "4", "4"]) {
        for cmd in ["quotient", "slopes", "sweep"] {
            let out = bnlab(&[cmd, "--jobs", jobs, "--out-dir", dir.path().to_str().unwrap()]);
            assert_eq!(out.status.code(), Some(0), "{cmd}");
        }
    }
    for name in ["quotient.csv", "quotient.json", "slopes.csv", "slopes.json", "sweep.csv", "sweep.json"] {
        let reference = std::fs::read(dirs[0].path().join(name)).unwrap();
        for dir in &dirs[1..] {
            assert_eq!(std::fs::read(dir.path().join(name)).unwrap(), reference, "{name}");
        }
    }
}

#[test]
fn plots_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("slopes.svg");
    let out = bnlab(&["slopes", "--plot", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("stroke-dasharray"));
}
