//! End-to-end tests of the `rmstat` binary: flag handling, file output,
//! config precedence, determinism, and the error/exit-code contract.

use std::path::PathBuf;
use std::process::{Command, Output};

fn rmstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmstat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("rmstat_test_{}_{name}", std::process::id()));
    p
}

#[test]
fn mean_csv_headers_and_values() {
    let out = rmstat(&[
        "mean", "--ensemble", "bessel", "--f", "gaussian", "--nu", "0.5", "--alpha", "30",
        "--quad-n", "120",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "alpha,tr_operator,closed_form_eq22_or_thm2,deviation"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let tr: f64 = row[1].parse().unwrap();
    let closed: f64 = row[2].parse().unwrap();
    // (30/pi)(sqrt(pi)/2) - 1/4
    let want = 30.0 / std::f64::consts::PI * 0.5 * std::f64::consts::PI.sqrt() - 0.25;
    assert!((closed - want).abs() < 1e-12);
    assert!((tr - want).abs() < 0.02, "trace {tr} vs {want}");
}

#[test]
fn sine_mean_reports_both_conventions() {
    let out = rmstat(&[
        "mean", "--ensemble", "sine", "--f", "gaussian", "--alpha", "10", "--quad-n", "120",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.ends_with("thm2_literal_mean"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let tr: f64 = row[1].parse().unwrap();
    let literal: f64 = row[4].parse().unwrap();
    assert!((tr - 5.6419).abs() < 1e-3, "trace {tr}");
    assert!((tr - 2.0 * literal).abs() < 1e-6);
}

#[test]
fn zero_function_rows_are_zero() {
    let out = rmstat(&[
        "mean", "--ensemble", "bessel", "--f", "zero", "--alpha", "5", "--quad-n", "40",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let tr: f64 = row[1].parse().unwrap();
    let closed: f64 = row[2].parse().unwrap();
    assert_eq!(tr, 0.0);
    assert_eq!(closed, 0.0);
}

#[test]
fn cf_zero_k_row_is_exactly_one() {
    let out = rmstat(&[
        "cf", "--ensemble", "bessel", "--f", "gaussian", "--nu", "0", "--alpha", "8", "--k",
        "0,0.2", "--quad-n", "60",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
    // det_value serialized as re+imi; the k = 0 determinant is exactly 1.
    assert!(row[2].starts_with("1.0000000000000000e0+"), "{}", row[2]);
    let pred: &str = row[3];
    assert!(pred.starts_with("1.0000000000000000e0+"), "{pred}");
}

#[test]
fn json_format_mirrors_columns() {
    let out = rmstat(&[
        "variance", "--ensemble", "bessel", "--f", "gaussian", "--nu", "-0.5", "--alpha",
        "10", "--quad-n", "80", "--format", "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert!(row["operator_variance"].is_f64());
    assert!(row["eq25"].is_f64());
    assert!(row["eq26"].is_f64());
    let v = row["operator_variance"].as_f64().unwrap();
    let want = 1.0 / (4.0 * std::f64::consts::PI);
    assert!((v - want).abs() < 1e-3, "variance {v}");
}

#[test]
fn config_file_flags_and_manifest() {
    let cfg_path = tmp("config.json");
    let out_path = tmp("rows.csv");
    std::fs::write(
        &cfg_path,
        r#"{"ensemble": "bessel", "f_id": "cauchy", "nu": 1.0,
            "alpha_list": [2.0], "quad_n": 48}"#,
    )
    .unwrap();
    // Flag overrides the config file's alpha list; f_id comes from the file.
    let out = rmstat(&[
        "mean",
        "--config",
        cfg_path.to_str().unwrap(),
        "--alpha",
        "4",
        "--out",
        out_path.to_str().unwrap(),
        "--manifest",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[0].parse::<f64>().unwrap() - 4.0).abs() < 1e-12);
    // (4/pi)(pi/2) - 1/2 = 3/2 for cauchy at nu = 1.
    assert!((row[2].parse::<f64>().unwrap() - 1.5).abs() < 1e-12);

    let manifest_path = out_path.with_extension("csv.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["f_id"], "cauchy");
    assert_eq!(manifest["alpha_list"][0], 4.0);
    assert_eq!(manifest["command"], "mean");

    std::fs::remove_file(cfg_path).ok();
    std::fs::remove_file(out_path).ok();
    std::fs::remove_file(manifest_path).ok();
}

#[test]
fn montecarlo_runs_are_deterministic_files() {
    let a_path = tmp("mc_a.csv");
    let b_path = tmp("mc_b.csv");
    for (path, workers) in [(&a_path, "1"), (&b_path, "4")] {
        let out = rmstat(&[
            "montecarlo", "--ensemble", "bessel", "--f", "gaussian", "--nu", "0", "--N",
            "15", "--k", "0.2", "--mc-replicates", "300", "--seed", "11", "--quad-n", "60",
            "--workers", workers, "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&a_path).unwrap();
    let b = std::fs::read(&b_path).unwrap();
    assert_eq!(a, b, "outputs differ across worker counts");
    std::fs::remove_file(a_path).ok();
    std::fs::remove_file(b_path).ok();
}

#[test]
fn kernel_convergence_rows_sorted_and_decreasing() {
    let out = rmstat(&[
        "kernel-convergence", "--ensemble", "bessel", "--nu", "0", "--N", "100,25,50",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let sups: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(sups.len(), 3);
    assert!(sups[0] > sups[1] && sups[1] > sups[2], "{sups:?}");
}

#[test]
fn unknown_function_gives_error_json_and_nonzero_exit() {
    let out = rmstat(&["mean", "--f", "nosuch", "--alpha", "5"]);
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "runtime");
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("unknown test function"));
}

#[test]
fn empty_alpha_list_is_a_config_error() {
    let cfg_path = tmp("empty_alpha.json");
    std::fs::write(&cfg_path, r#"{"alpha_list": []}"#).unwrap();
    let out = rmstat(&["mean", "--config", cfg_path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("non-empty alpha list"));
    std::fs::remove_file(cfg_path).ok();
}

#[test]
fn manifest_without_out_is_rejected() {
    let out = rmstat(&["mean", "--alpha", "5", "--manifest"]);
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
}

#[test]
fn identities_exit_zero_and_report_small_exact_checks() {
    let out = rmstat(&[
        "identities", "--ensemble", "bessel", "--f", "gaussian", "--alpha", "6,9", "--k",
        "0.2", "--quad-n", "80", "--seed", "3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let kac: f64 = row[4].parse().unwrap();
    let tpq_q: f64 = row[5].parse().unwrap();
    let tpq_t: f64 = row[6].parse().unwrap();
    assert!(kac < 1e-11, "kac {kac}");
    assert!(tpq_q < 1e-6 && tpq_t < 1e-6, "tpq {tpq_q} {tpq_t}");
}
