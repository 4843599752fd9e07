// End-to-end CLI behavior: compute dumps, exit-code contract, config
// round-trips, determinism and the scan grid.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use finslerlab::RunConfig;
use finslerlab_core::catalog::{CovectorField, FieldSpec, MetricSpec, ScalarField};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_finslerlab"))
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("finslerlab-cli-tests");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

const EUCLID: &str = r#"{"kind": "euclidean", "n": 2}"#;
const CONFORMAL_CHANGE: &str =
    r#"{"sigma": {"kind": "linear", "coeffs": [1.0, 0.0]}, "b": {"kind": "zero"}}"#;
const CONST_B_CHANGE: &str =
    r#"{"sigma": {"kind": "zero"}, "b": {"kind": "constant", "values": [0.1, 0.0]}}"#;

#[test]
fn compute_flat_frame_has_zero_connection() {
    let metric = write_temp("euclid.json", EUCLID);
    let out = run(&["compute", "--metric", metric.to_str().unwrap(), "--at", "0.3,0.2;3,4"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["unbarred"]["metric_value"], 5.0);
    for plane in doc["unbarred"]["connection"].as_array().unwrap() {
        for row in plane.as_array().unwrap() {
            for v in row.as_array().unwrap() {
                assert!(v.as_f64().unwrap().abs() < 1e-12);
            }
        }
    }
}

#[test]
fn compute_parallel_one_form_zeroes_the_difference() {
    let metric = write_temp("euclid2.json", EUCLID);
    let change = write_temp("bconst.json", CONST_B_CHANGE);
    let out = run(&[
        "compute",
        "--metric",
        metric.to_str().unwrap(),
        "--change",
        change.to_str().unwrap(),
        "--at",
        "0.1,-0.2;3,4",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for plane in doc["barred"]["difference"].as_array().unwrap() {
        for row in plane.as_array().unwrap() {
            for v in row.as_array().unwrap() {
                assert!(v.as_f64().unwrap().abs() < 1e-10);
            }
        }
    }
}

#[test]
fn compute_conformal_difference_vector() {
    let metric = write_temp("euclid3.json", EUCLID);
    let change = write_temp("conf.json", CONFORMAL_CHANGE);
    let out = run(&[
        "compute",
        "--metric",
        metric.to_str().unwrap(),
        "--change",
        change.to_str().unwrap(),
        "--at",
        "0,0;3,4",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let d00 = doc["barred"]["difference_yy"].as_array().unwrap();
    assert!((d00[0].as_f64().unwrap() - (-7.0)).abs() < 1e-9);
    assert!((d00[1].as_f64().unwrap() - 24.0).abs() < 1e-9);
}

#[test]
fn compute_exit_codes_distinguish_data_from_usage() {
    let metric = write_temp("euclid4.json", EUCLID);
    // y = 0 is a data error at a well-formed request.
    let out = run(&["compute", "--metric", metric.to_str().unwrap(), "--at", "0,0;0,0"]);
    assert_eq!(out.status.code(), Some(1), "invalid point is a data error");
    // A malformed point string is a usage error.
    let out = run(&["compute", "--metric", metric.to_str().unwrap(), "--at", "0,0"]);
    assert_eq!(out.status.code(), Some(2));
    // So is a missing metric file.
    let out = run(&["compute", "--metric", "/nonexistent.json", "--at", "0,0;1,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_explicit_config_passes() {
    let metric = write_temp("euclid5.json", EUCLID);
    let change = write_temp("conf5.json", CONFORMAL_CHANGE);
    let out = run(&[
        "verify",
        "--metric",
        metric.to_str().unwrap(),
        "--change",
        change.to_str().unwrap(),
        "--samples",
        "30",
        "--suite",
        "difference_tensor",
        "--suite",
        "vanishing_laws",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["reports"].as_array().unwrap().len() >= 12);
}

#[test]
fn verify_unknown_suite_names_the_key() {
    let metric = write_temp("euclid6.json", EUCLID);
    let change = write_temp("conf6.json", CONFORMAL_CHANGE);
    let out = run(&[
        "verify",
        "--metric",
        metric.to_str().unwrap(),
        "--change",
        change.to_str().unwrap(),
        "--suite",
        "spectral_flow",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("spectral_flow"), "message must name the bad key: {stderr}");
}

#[test]
fn verify_corrupted_tolerance_fails_with_exit_one() {
    let config = RunConfig::new(
        MetricSpec::Euclidean { n: 2 },
        FieldSpec { sigma: ScalarField::Linear { coeffs: vec![0.5, 0.0] }, b: CovectorField::Zero },
    );
    let mut config = config;
    config.samples = 10;
    config.suites = vec!["difference_tensor".to_string()];
    config.tolerances.insert("difference.full_vs_direct".to_string(), 1e-300);
    let path = write_temp("corrupt.json", &serde_json::to_string(&config).unwrap());
    let out = run(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "tightened tolerance must fail");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("difference.full_vs_direct"));
}

#[test]
fn run_config_round_trips_and_rejects_unknown_keys() {
    let config = RunConfig::new(
        MetricSpec::Quartic { n: 2 },
        FieldSpec {
            sigma: ScalarField::Bump { amplitude: 0.2, center: vec![0.0, 0.1], width: 1.2 },
            b: CovectorField::Constant { values: vec![0.1, 0.0] },
        },
    );
    let text = serde_json::to_string_pretty(&config).unwrap();
    let back: RunConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(config, back, "lossless round trip");

    let with_unknown = text.replace("\"samples\"", "\"smaples\"");
    let err = serde_json::from_str::<RunConfig>(&with_unknown).unwrap_err();
    assert!(err.to_string().contains("smaples"), "unknown keys must be rejected by name");

    let path = write_temp("unknown_key.json", &with_unknown);
    let out = run(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_reports_are_byte_identical_across_runs() {
    let metric = write_temp("euclid7.json", EUCLID);
    let change = write_temp("conf7.json", CONFORMAL_CHANGE);
    let args = [
        "verify",
        "--metric",
        metric.to_str().unwrap(),
        "--change",
        change.to_str().unwrap(),
        "--samples",
        "15",
        "--suite",
        "core_identities",
        "--suite",
        "difference_tensor",
        "--seed",
        "99",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "same config + seed, different bytes");
}

#[test]
fn verify_json_round_trips_and_csv_sits_alongside() {
    let metric = write_temp("euclid9.json", EUCLID);
    let change = write_temp("conf9.json", CONFORMAL_CHANGE);
    let out_path = std::env::temp_dir().join("finslerlab-cli-tests").join("report.json");
    let out = run(&[
        "verify",
        "--metric",
        metric.to_str().unwrap(),
        "--change",
        change.to_str().unwrap(),
        "--samples",
        "5",
        "--suite",
        "difference_tensor",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&out_path).unwrap();
    let doc = finslerlab::output::parse_reports(&text).expect("emitted JSON validates");
    assert_eq!(doc.run.samples, 5);
    assert!(!doc.reports.is_empty());
    for r in &doc.reports {
        assert!(!r.residuals.is_empty(), "per-point residual trace present");
    }
    let csv = fs::read_to_string(out_path.with_extension("csv")).unwrap();
    assert!(csv.starts_with("identity,suite,"));
}

#[test]
fn verify_csv_summary_shape() {
    let metric = write_temp("euclid8.json", EUCLID);
    let change = write_temp("conf8.json", CONFORMAL_CHANGE);
    let out = run(&[
        "verify",
        "--metric",
        metric.to_str().unwrap(),
        "--change",
        change.to_str().unwrap(),
        "--samples",
        "5",
        "--suite",
        "difference_tensor",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "identity,suite,samples,max_abs,max_rel,mean_abs,tolerance,verdict"
    );
    for line in lines {
        assert_eq!(line.split(',').count(), 8, "row shape: {line}");
        assert!(line.ends_with(",pass"), "all identities pass here: {line}");
    }
}

#[test]
fn scan_grid_is_monotone_and_tolerates_invalid_cells() {
    let out = run(&[
        "scan",
        "--sigma-amplitudes",
        "0,0.1,0.2,0.4",
        "--b-magnitudes",
        "0,1.5",
        "--samples",
        "30",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);

    // The overlong 1-form cells are marked invalid and the run continues.
    let invalid: Vec<&&str> = rows.iter().filter(|r| r.ends_with(",invalid")).collect();
    assert_eq!(invalid.len(), 4, "every b = 1.5 cell is invalid: {text}");

    // Along b = 0 the norm of the difference tensor grows with the
    // amplitude of the linear scalar field.
    let mut along_b0: Vec<f64> = Vec::new();
    for row in &rows {
        let cols: Vec<&str> = row.split(',').collect();
        if cols[1] == "0" && cols[5] == "ok" {
            along_b0.push(cols[2].parse().unwrap());
        }
    }
    assert_eq!(along_b0.len(), 4);
    for pair in along_b0.windows(2) {
        assert!(pair[0] < pair[1], "max |D| not increasing: {along_b0:?}");
    }
}
