use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mql(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mql"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("mql runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn decompose_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = mql(dir.path(), &["decompose", "2ij"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(
        (v["K"].as_u64(), v["u"].as_u64(), v["n"].as_u64()),
        (Some(4), Some(1), Some(1))
    );
}

#[test]
fn cp_enum_three_has_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = mql(dir.path(), &["cp-enum", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(r.records().count(), 4);
}

#[test]
fn fresh_formal_lift_passes_check() {
    let dir = tempfile::tempdir().unwrap();
    for eps in ["1", "-1"] {
        std::fs::write(
            dir.path().join("c.json"),
            format!(r#"{{"epsilon": {eps}}}"#),
        )
        .unwrap();
        let o = mql(
            dir.path(),
            &[
                "--config", "c.json", "--kmax", "300", "--out", "t.json", "lift",
            ],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let o = mql(dir.path(), &["check-maass", "--table", "t.json"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let report: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(report["pass"], Value::Bool(true));
    }
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = mql(
        dir.path(),
        &[
            "--out",
            "bad.json",
            "--kmax",
            "128",
            "random-table",
            "--no-dyadic",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let o = mql(dir.path(), &["check-maass", "--table", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!report["failures"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_record_is_named() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("in.txt"), "2ij\n1+i\nbanana\n").unwrap();
    let o = mql(dir.path(), &["decompose", "--input", "in.txt"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("record 3") && err.contains("banana"), "{err}");

    // 1 is not in S
    let o = mql(dir.path(), &["decompose", "2ij", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("record 2"));
}

#[test]
fn malformed_config_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"tolerance": -1}"#).unwrap();
    let o = mql(dir.path(), &["--config", "c.json", "adjoint"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tolerance"));

    std::fs::write(dir.path().join("c.json"), r#"{"lambdas": {"three": 1.0}}"#).unwrap();
    let o = mql(dir.path(), &["--config", "c.json", "satake"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("three"));

    std::fs::write(
        dir.path().join("t.json"),
        r#"{"backend":"numeric","epsilon":1,"k_max":16,"entries":[{"K":6,"u":0,"n":3,"value":1.0}]}"#,
    )
    .unwrap();
    let o = mql(dir.path(), &["check-maass", "--table", "t.json"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn satake_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"lambdas": {"3": 0.5, "7": -1.9}}"#,
    )
    .unwrap();
    let o = mql(
        dir.path(),
        &[
            "--config", "c.json", "--out", "s.csv", "satake", "--report", "r.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut r = csv::Reader::from_path(dir.path().join("s.csv")).unwrap();
    assert_eq!(r.records().count(), 2);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["invariants_hold"], Value::Bool(true));
    for row in report["rows"].as_array().unwrap() {
        assert_eq!(row["violated"], Value::Bool(true));
        assert!((row["max_abs_v"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn hecke_eigen_report_on_synthetic_lift() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"epsilon": -1, "lambdas": {"3": 1.25}, "k_max": 1200, "primes": [2, 3], "seed": 3}"#,
    )
    .unwrap();
    let o = mql(
        dir.path(),
        &[
            "--config",
            "c.json",
            "--backend",
            "numeric",
            "--out",
            "t.json",
            "lift",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = mql(
        dir.path(),
        &[
            "--config", "c.json", "hecke", "--table", "t.json", "--eigen",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = mql(
        dir.path(),
        &[
            "--config", "c.json", "lambda", "--table", "t.json", "--prime", "3",
        ],
    );
    let est: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((est["lambda"].as_f64().unwrap() - 1.25).abs() < 1e-9);

    // single values agree between an index and another representative of it
    let a = mql(
        dir.path(),
        &[
            "hecke", "--table", "t.json", "--op", "H2", "--prime", "3", "--index", "18,0,3",
        ],
    );
    let b = mql(
        dir.path(),
        &[
            "hecke",
            "--table",
            "t.json",
            "--op",
            "H2",
            "--prime",
            "3",
            "--element",
            "3+3i",
        ],
    );
    let va: Value = serde_json::from_slice(&a.stdout).unwrap();
    let vb: Value = serde_json::from_slice(&b.stdout).unwrap();
    let (x, y) = (va["value"].as_f64().unwrap(), vb["value"].as_f64().unwrap());
    assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0), "{x} vs {y}");
}

#[test]
fn invert_recovers_symbols() {
    let dir = tempfile::tempdir().unwrap();
    mql(dir.path(), &["--kmax", "64", "--out", "t.json", "lift"]);
    let o = mql(dir.path(), &["invert", "--table", "t.json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let values = v["values"].as_array().unwrap();
    assert_eq!(values.len(), 32);
    for entry in values {
        let n = entry["N"].as_u64().unwrap();
        let only: Vec<_> = entry["value"].as_object().unwrap().iter().collect();
        assert_eq!(only.len(), 1);
        assert_eq!(only[0].0, &n.to_string());
        assert_eq!(only[0].1, "1");
    }
}
