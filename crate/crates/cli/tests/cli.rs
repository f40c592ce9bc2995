//! End-to-end checks of the binary: exit codes, output records, traces,
//! and byte determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pbox-expect")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn")
}

fn parse_report(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|s| s.to_string()).collect())
        .collect()
}

#[test]
fn linear_example_all_methods() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let out = run(&[
        "run",
        fixture("loss_linear.json").to_str().unwrap(),
        "--report-out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_report(&report);
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let lower: f64 = row[1].parse().unwrap();
        let upper: f64 = row[2].parse().unwrap();
        assert!((lower - 15.0).abs() < 0.02, "{}: lower {lower}", row[0]);
        assert!((upper - 18.0).abs() < 0.02, "{}: upper {upper}", row[0]);
        assert!(lower <= upper);
    }
    // the random-set row carries a certified enclosure
    let rs = rows.iter().find(|r| r[0] == "randomset").unwrap();
    let enc_lo_lo: f64 = rs[3].parse().unwrap();
    let enc_lo_hi: f64 = rs[4].parse().unwrap();
    assert!(enc_lo_lo <= 15.0 && 15.0 <= enc_lo_hi);
}

#[test]
fn conditional_closed_and_search_agree() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let out = run(&[
        "run",
        fixture("loss_linear_event.json").to_str().unwrap(),
        "--report-out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_report(&report);
    assert_eq!(rows.len(), 2);
    let closed: (f64, f64) = (rows[0][1].parse().unwrap(), rows[0][2].parse().unwrap());
    let search: (f64, f64) = (rows[1][1].parse().unwrap(), rows[1][2].parse().unwrap());
    assert!((closed.0 - 14.2317).abs() < 1e-3);
    assert!((closed.1 - 18.4081).abs() < 1e-3);
    assert!((closed.0 - search.0).abs() < 0.02);
    assert!((closed.1 - search.1).abs() < 0.02);
}

#[test]
fn quadratic_auto_shape() {
    let out = run(&["run", fixture("loss_quadratic.json").to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("detected shape: one maximum at 5"), "{stdout}");
    assert!(stdout.contains("29.745"), "{stdout}");
    assert!(stdout.contains("52.737"), "{stdout}");
}

#[test]
fn oscillating_trace_has_five_jumps() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = run(&[
        "run",
        fixture("loss_oscillating.json").to_str().unwrap(),
        "--trace-out",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,F,segment_kind");
    let jumps = text.lines().filter(|l| l.ends_with(",jump")).count();
    assert_eq!(jumps, 5, "expected the five-interval construction");
    // trace levels are a nondecreasing cdf
    let mut prev = -1.0f64;
    for line in text.lines().skip(1) {
        let f: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(f >= prev - 1e-9, "trace level decreased: {line}");
        prev = f;
    }
}

#[test]
fn missing_file_is_validation_failure() {
    let out = run(&["run", "no_such_file.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schema_violation_is_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema_version": 1, "pbox": {}}"#).unwrap();
    let out = run(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // swapped bounding curves fail semantic validation
    let swapped = dir.path().join("swapped.json");
    std::fs::write(
        &swapped,
        r#"{
          "schema_version": 1,
          "pbox": {
            "lower": {"kind": "exponential", "rate": 0.5},
            "upper": {"kind": "exponential", "rate": 0.2}
          },
          "objective": {"expression": "x"}
        }"#,
    )
    .unwrap();
    let out = run(&["run", swapped.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_subcommand() {
    let out = run(&["validate", fixture("loss_linear.json").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("valid"));
}

#[test]
fn converge_gaps_shrink() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("conv.csv");
    let out = run(&[
        "converge",
        fixture("loss_linear.json").to_str().unwrap(),
        "--sizes",
        "64,256,1024",
        "--report-out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_report(&report);
    assert_eq!(rows.len(), 3);
    let gaps: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "gaps {gaps:?}");
}

#[test]
fn output_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let r1 = dir.path().join("r1.csv");
    let r2 = dir.path().join("r2.csv");
    for (path, _) in [(&r1, 0), (&r2, 1)] {
        let out = run(&[
            "run",
            fixture("loss_quadratic_event.json").to_str().unwrap(),
            "--report-out",
            path.to_str().unwrap(),
            "--seed",
            "42",
        ]);
        assert!(out.status.success());
    }
    assert_eq!(
        std::fs::read(&r1).unwrap(),
        std::fs::read(&r2).unwrap(),
        "reports differ between identical runs"
    );
}
