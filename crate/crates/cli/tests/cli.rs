//! End-to-end CLI checks: CSV ingestion, JSON report shape, exit codes, and
//! error messages, all through the built binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn breaklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_breaklab"))
        .args(args)
        .output()
        .expect("the binary runs")
}

fn report(args: &[&str]) -> Value {
    let output = breaklab(args);
    assert!(
        output.status.success(),
        "breaklab {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is a JSON report")
}

fn failure(args: &[&str]) -> String {
    let output = breaklab(args);
    assert_eq!(
        output.status.code(),
        Some(1),
        "breaklab {args:?} was expected to fail"
    );
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn write_csv(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn attack_on_csv_input_reports_a_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(dir.path(), "x.csv", "value\n1.0\n2.0\n3.0\n4.0\n5.0\n");
    let report = report(&[
        "--command",
        "attack",
        "--estimator",
        "median",
        "--input",
        &csv,
        "--definition",
        "def1",
        "--attack",
        "s=1",
    ]);

    assert_eq!(report["body"]["schema_version"], "1");
    assert_eq!(report["body"]["config"]["estimator"], "median");
    assert_eq!(report["body"]["config"]["input"][0], csv);
    let runs = report["body"]["results"]["runs"].as_array().unwrap();
    // The canonical battery for a translation-equivariant estimator tries
    // both shift directions.
    assert_eq!(runs.len(), 2);
    for run in runs {
        assert_eq!(run["verdict"]["outcome"], "not-broken");
        assert_eq!(run["trajectory"]["entries"].as_array().unwrap().len(), 6);
    }
    assert!(report["wall_clock_ms"].is_u64());
}

#[test]
fn reachable_csv_matches_the_analytic_interval() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(dir.path(), "x.csv", "1\n2\n3\n4\n5\n");
    let report = report(&[
        "--command",
        "reachable",
        "--estimator",
        "median",
        "--input",
        &csv,
        "--outliers",
        "1",
    ]);

    let results = &report["body"]["results"];
    let oracle = &results["oracle"]["intervals"][0];
    assert_eq!(oracle["lo"], 2.0);
    assert_eq!(oracle["hi"], 4.0);
    assert_eq!(results["oracle"]["provenance"]["kind"], "oracle");
    let analytic = &results["analytic"]["intervals"][0];
    assert_eq!(analytic["lo"], 2.0);
    assert_eq!(analytic["hi"], 4.0);
    assert_eq!(results["analytic"]["provenance"]["kind"], "analytic");
}

#[test]
fn nonnegative_retag_enables_the_mean_formula() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(dir.path(), "x.csv", "1\n2\n3\n");
    let report = report(&[
        "--command",
        "reachable",
        "--estimator",
        "mean",
        "--input",
        &csv,
        "--domain",
        "nonnegative",
        "--outliers",
        "1",
    ]);

    let analytic = &report["body"]["results"]["analytic"]["intervals"][0];
    // One outlier pinned at zero leaves (1 + 2)/3; the upper end is open.
    assert_eq!(analytic["lo"], 1.0);
    assert!(analytic["hi"].is_null());
    assert_eq!(analytic["hi_unbounded"], true);
}

#[test]
fn def4_needs_a_panel() {
    let stderr = failure(&[
        "--command",
        "reachable",
        "--estimator",
        "mean",
        "--generate",
        "n=5,seed=1",
        "--definition",
        "def4",
        "--outliers",
        "1",
    ]);
    assert!(stderr.contains("panel"), "stderr: {stderr}");
}

#[test]
fn def4_flags_the_mean_and_clears_the_median() {
    let base = [
        "--command",
        "reachable",
        "--generate",
        "n=5,seed=800",
        "--panel",
        "5",
        "--definition",
        "def4",
        "--outliers",
        "1",
        "--grid",
        "51",
    ];
    let mut args = base.to_vec();
    args.extend(["--estimator", "mean"]);
    let broken = report(&args);
    assert_eq!(
        broken["body"]["results"]["verdict"]["outcome"],
        "broken-x-independent-set"
    );
    assert_eq!(
        broken["body"]["results"]["sets"].as_array().unwrap().len(),
        5
    );

    let mut args = base.to_vec();
    args.extend(["--estimator", "median"]);
    let clean = report(&args);
    assert_eq!(clean["body"]["results"]["verdict"]["outcome"], "not-broken");
}

#[test]
fn equivariance_check_reports_identities() {
    let report = report(&[
        "--command",
        "equivariance-check",
        "--estimator",
        "ols",
        "--generate",
        "n=10,seed=3,domain=regression",
    ]);

    let results = &report["body"]["results"];
    let tags = results["tag_checks"].as_array().unwrap();
    assert!(!tags.is_empty());
    for tag in tags {
        assert_eq!(tag["pass"], true, "tag check failed: {tag}");
    }
    let glm = results["glm_scaling"].as_array().unwrap();
    assert_eq!(glm.len(), 2); // c = 10 and c = 1e3
    for check in glm {
        assert_eq!(check["pass"], true, "scaling check failed: {check}");
    }
}

#[test]
fn limit_set_collapses_b1_but_not_the_median() {
    let collapsed = report(&[
        "--command",
        "limit-set",
        "--estimator",
        "b1",
        "--generate",
        "n=10,seed=1",
        "--panel",
        "5",
        "--attack",
        "M=9,s=1",
    ]);
    assert_eq!(
        collapsed["body"]["results"]["verdict"]["outcome"],
        "broken-constant-limit"
    );

    let held = report(&[
        "--command",
        "limit-set",
        "--estimator",
        "median",
        "--generate",
        "n=5,seed=1",
        "--panel",
        "5",
    ]);
    assert_eq!(held["body"]["results"]["verdict"]["outcome"], "not-broken");
}

#[test]
fn breakdown_point_of_the_median() {
    let report = report(&[
        "--command",
        "breakdown-point",
        "--estimator",
        "median",
        "--generate",
        "n=5,seed=2",
    ]);

    let results = &report["body"]["results"];
    assert_eq!(results["smallest_breaking"], 3);
    assert_eq!(results["fraction"], 0.6);
    assert_eq!(results["per_s"].as_array().unwrap().len(), 5);
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let output = breaklab(&[
        "--command",
        "breakdown-point",
        "--estimator",
        "mean",
        "--generate",
        "n=3,seed=4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert!(output.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let report: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["body"]["schema_version"], "1");
    assert_eq!(report["body"]["results"]["smallest_breaking"], 1);
}

#[test]
fn unknown_estimator_fails_cleanly() {
    let stderr = failure(&[
        "--command",
        "attack",
        "--estimator",
        "nope",
        "--generate",
        "n=5,seed=1",
    ]);
    assert!(
        stderr.contains("unknown estimator name `nope`"),
        "stderr: {stderr}"
    );
}

#[test]
fn malformed_csv_reports_the_offending_line() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(dir.path(), "bad.csv", "a,b,c\n1,2,3\n");
    let stderr = failure(&[
        "--command",
        "attack",
        "--estimator",
        "mean",
        "--input",
        &csv,
    ]);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn exhausted_budget_is_a_clean_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(dir.path(), "x.csv", "1\n2\n3\n4\n5\n6\n7\n");
    let stderr = failure(&[
        "--command",
        "reachable",
        "--estimator",
        "median",
        "--input",
        &csv,
        "--outliers",
        "3",
        "--budget",
        "50",
    ]);
    assert!(stderr.contains("budget"), "stderr: {stderr}");
}

#[test]
fn input_and_generate_are_mutually_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(dir.path(), "x.csv", "1\n2\n3\n");
    let stderr = failure(&[
        "--command",
        "attack",
        "--estimator",
        "mean",
        "--input",
        &csv,
        "--generate",
        "n=5,seed=1",
    ]);
    assert!(stderr.contains("mutually exclusive"), "stderr: {stderr}");
}

#[test]
fn missing_samples_is_an_error() {
    let stderr = failure(&["--command", "attack", "--estimator", "mean"]);
    assert!(
        stderr.contains("--input or --generate"),
        "stderr: {stderr}"
    );
}

#[test]
fn regression_csv_round_trips_through_an_attack() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(
        dir.path(),
        "xy.csv",
        "x,y\n1,1.1\n2,2.0\n3,3.2\n4,3.9\n5,5.1\n6,5.8\n",
    );
    let report = report(&[
        "--command",
        "attack",
        "--estimator",
        "ols_slope",
        "--input",
        &csv,
        "--attack",
        "kind=scale-half-x,s=3",
        "--definition",
        "def1",
    ]);
    let run = &report["body"]["results"]["runs"][0];
    // Scaling covariates up squashes the slope toward zero: bounded, so no
    // divergence breakdown.
    assert_eq!(run["verdict"]["outcome"], "not-broken");
    assert_eq!(run["classification"]["outcome"], "converged");
}
