//! End-to-end tests of the `qcd` binary: exit codes, file output, and the
//! CSV/JSON contract.

use std::path::Path;
use std::process::{Command, Output};

fn qcd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn usage_errors_exit_2() {
    // Missing required --seed.
    assert_eq!(qcd(&["simulate"]).status.code(), Some(2));
    // Malformed grid.
    let out = qcd(&["sweep", "--seed", "1", "--log-threshold-grid", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    // Parameter out of range.
    let out = qcd(&["kl", "--rho1", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    // Too few validation trials.
    let out = qcd(&["validate", "--seed", "1", "--trials", "50"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(qcd(&["--help"]).status.code(), Some(0));
    assert_eq!(qcd(&["--version"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_path_exits_3() {
    let out = qcd(&[
        "simulate",
        "--seed",
        "7",
        "--trials",
        "100",
        "--horizon",
        "1000",
        "--out",
        "/nonexistent-dir/result.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn kl_reports_divergences_and_regime() {
    let out = qcd(&["kl", "--rho-assumed", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("d10 = "));
    assert!(text.contains("d11_tilde = "));
    assert!(text.contains("regime = finite-add-bound"));

    let out = qcd(&["kl", "--rho-assumed", "0.9"]);
    assert!(stdout(&out).contains("regime = infinite-cusum-add"));
}

#[test]
fn simulate_writes_csv_and_json_with_matching_values() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("run.csv");
    let json_path = dir.path().join("run.json");
    let common = [
        "--seed", "42", "--trials", "300", "--horizon", "5000", "--log-threshold", "3.0",
    ];

    let out = qcd(
        &[&["simulate"], &common[..], &["--out", csv_path.to_str().unwrap()]].concat(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = qcd(
        &[
            &["simulate"],
            &common[..],
            &["--format", "json", "--out", json_path.to_str().unwrap()],
        ]
        .concat(),
    );
    assert_eq!(out.status.code(), Some(0));

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "log_threshold,procedure,add,add_stderr,pfa,pfa_stderr,arl,arl_stderr,n_censored,bound_add,bound_pfa,bound_arl"
    );
    let data: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(data.len(), 2); // cusum + sr at one threshold
    assert!(!csv.contains('\r'));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(json["config"]["seed"], 42);
    assert_eq!(json["config"]["trials"], 300);
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), data.len());
    for (row, cells) in rows.iter().zip(&data) {
        assert_eq!(row["procedure"].as_str().unwrap(), cells[1]);
        for (key, idx) in [("add", 2), ("pfa", 4), ("arl", 6), ("bound_pfa", 10)] {
            let from_csv: f64 = cells[idx].parse().unwrap();
            let from_json = row[key].as_f64().unwrap();
            assert_eq!(from_csv, from_json, "{key} differs between formats");
        }
    }
}

#[test]
fn repeated_sweeps_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| -> Vec<u8> {
        let path = dir.path().join(name);
        let out = qcd(&[
            "sweep",
            "--seed",
            "42",
            "--trials",
            "200",
            "--horizon",
            "5000",
            "--log-threshold-grid",
            "3:4:0.5",
            "--workers",
            workers,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(&path).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "3");
    let c = run("c.csv", "0");
    assert_eq!(a, b);
    assert_eq!(b, c);
    // Three thresholds, two procedures each, plus the header.
    assert_eq!(a.iter().filter(|&&byte| byte == b'\n').count(), 7);
}

#[test]
fn validate_passes_at_reduced_trial_count() {
    let out = qcd(&["validate", "--seed", "11", "--trials", "400"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("all checks passed"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn stdout_output_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let args = ["simulate", "--seed", "5", "--trials", "150", "--horizon", "2000"];
    let piped = qcd(&args);
    assert_eq!(piped.status.code(), Some(0));
    let filed = qcd(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(filed.status.code(), Some(0));
    assert_eq!(piped.stdout, std::fs::read(Path::new(&path)).unwrap());
}
