//! End-to-end tests of the binary: each one drives a subcommand through
//! real files and checks the report JSON and the exit status.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbpoly"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).expect("stdout is one JSON report")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

const FAMILY_SPEC: &str = r#"{
    "variant": "Nondegenerate",
    "avg": {"d": 2, "sigma": [1, 1]},
    "beta_rule": {"rule": "ReciprocalTheta", "c": [2, 1]}
}"#;

const FAMILY_OP_SPEC: &str = r#"{
    "type": "MonomialFamily",
    "family": {
        "variant": "Nondegenerate",
        "avg": {"d": 2, "sigma": [1, 1]},
        "beta_rule": {"rule": "ReciprocalTheta", "c": [2, 1]}
    }
}"#;

const SUM_OF_INTEGRALS: &str = r#"{
    "type": "LinComb",
    "terms": [
        {"coeff": [1, 1], "op": {"type": "IntegralFrom", "a": [0, 1]}},
        {"coeff": [1, 1], "op": {"type": "IntegralFrom", "a": [1, 1]}}
    ]
}"#;

#[test]
fn verify_accepts_the_period_two_family() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("op.json"), FAMILY_OP_SPEC).unwrap();
    let out = run(dir.path(), &["verify", "op.json"]);
    assert_eq!(code(&out), 0);
    let report = report(&out);
    assert_eq!(report["command"], "verify");
    assert_eq!(report["verdict"], "holds");
    assert_eq!(report["bound"], 30);
    assert!(report.get("counterexample").is_none());
}

#[test]
fn verify_rejects_the_sum_of_two_integrals() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("op.json"), SUM_OF_INTEGRALS).unwrap();
    let out = run(dir.path(), &["verify", "op.json", "--bound", "5"]);
    assert_eq!(code(&out), 1);
    let report = report(&out);
    assert_eq!(report["verdict"], "fails");
    assert_eq!(report["counterexample"]["m"], 0);
    assert_eq!(report["counterexample"]["n"], 0);
    // the residual is the constant polynomial 1
    assert_eq!(report["counterexample"]["residual"][0][0], "1");
}

#[test]
fn codec_refuses_a_table_without_a_visible_period() {
    let dir = TempDir::new().unwrap();
    let rows: String = (0..10).map(|n| format!("{n},{}\n", n * n + 1)).collect();
    fs::write(dir.path().join("table.csv"), rows).unwrap();
    let out = run(dir.path(), &["codec", "phi", "table.csv"]);
    assert_eq!(code(&out), 2);
    assert_eq!(report(&out)["verdict"], "input-error");
}

#[test]
fn codec_roundtrips_through_files() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("seq.json"), r#"{"d": 3, "sigma": [1, 2, 1]}"#).unwrap();
    let out = run(
        dir.path(),
        &["codec", "psi", "seq.json", "--bound", "20", "--format", "csv"],
    );
    assert_eq!(code(&out), 0);
    let table = report(&out)["data"]["table"].as_str().unwrap().to_string();
    fs::write(dir.path().join("table.csv"), table).unwrap();

    let out = run(dir.path(), &["codec", "phi", "table.csv"]);
    assert_eq!(code(&out), 0);
    let report = report(&out);
    assert_eq!(report["verdict"], "decoded");
    assert_eq!(report["data"]["d"], 3);
    assert_eq!(report["data"]["sigma"], serde_json::json!([1, 2, 1]));
}

#[test]
fn construct_then_classify_csv() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("fam.json"), FAMILY_SPEC).unwrap();
    let out = run(
        dir.path(),
        &["construct", "fam.json", "--out", "table.csv", "--bound", "40"],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["data"]["rows"], 41);

    let out = run(dir.path(), &["classify", "table.csv"]);
    assert_eq!(code(&out), 0);
    let report = report(&out);
    assert_eq!(report["verdict"], "classified");
    assert_eq!(report["bound"], 40);
    assert_eq!(report["data"]["degenerate"], false);
    assert_eq!(report["data"]["injective"], false);
    assert_eq!(report["data"]["averaging"]["d"], 2);
}

#[test]
fn construct_then_classify_json() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("fam.json"), FAMILY_SPEC).unwrap();
    let out = run(
        dir.path(),
        &[
            "construct",
            "fam.json",
            "--out",
            "table.json",
            "--bound",
            "30",
            "--format",
            "json",
        ],
    );
    assert_eq!(code(&out), 0);

    let out = run(dir.path(), &["classify", "table.json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["verdict"], "classified");
}

#[test]
fn classify_reports_a_lawless_table() {
    let dir = TempDir::new().unwrap();
    let mut rows = String::from("n,beta_num,beta_den,theta\n");
    for n in 0..=20 {
        rows.push_str(&format!("{n},1,1,{}\n", n + 1));
    }
    fs::write(dir.path().join("table.csv"), rows).unwrap();
    let out = run(dir.path(), &["classify", "table.csv"]);
    assert_eq!(code(&out), 1);
    let report = report(&out);
    assert_eq!(report["verdict"], "fails");
    assert_eq!(report["counterexample"]["m"], 0);
    assert_eq!(report["counterexample"]["n"], 0);
}

#[test]
fn measure_tabulates_the_initialized_integral() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("op.json"), r#"{"type": "IntegralFrom", "a": [2, 1]}"#).unwrap();
    let out = run(dir.path(), &["measure", "op.json", "1", "--bound", "4"]);
    assert_eq!(code(&out), 0);
    let report = report(&out);
    assert_eq!(report["verdict"], "measured");
    // mu(x^n) = 2^{n+1}/(n+1)
    let values = &report["data"]["values"];
    assert_eq!(values[0], serde_json::json!(["2", "1"]));
    assert_eq!(values[2], serde_json::json!(["8", "3"]));
    assert_eq!(values[4], serde_json::json!(["32", "5"]));
}

#[test]
fn measure_refuses_an_operator_without_the_law() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("op.json"),
        r#"{"type": "MultiplyBy", "r": [[0, 1], [1, 1]]}"#,
    )
    .unwrap();
    let out = run(dir.path(), &["measure", "op.json", "1"]);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out)["verdict"], "refused");
}

#[test]
fn probe_records_evidence_without_a_verdict() {
    let dir = TempDir::new().unwrap();
    // u -> int_2 (x^2 + 1) u, whose witness is x^2 + 1
    fs::write(
        dir.path().join("op.json"),
        r#"{
            "type": "Compose",
            "outer": {"type": "IntegralFrom", "a": [2, 1]},
            "inner": {"type": "MultiplyBy", "r": [[1, 1], [0, 1], [1, 1]]}
        }"#,
    )
    .unwrap();
    let out = run(dir.path(), &["probe", "op.json", "x^2 + 1", "--bound", "10"]);
    assert_eq!(code(&out), 0);
    let report = report(&out);
    assert_eq!(report["verdict"], "recorded");
    assert_eq!(report["data"]["numerator"]["constant"], true);
    assert_eq!(report["data"]["denominator"]["constant"], true);
    assert_eq!(report["data"]["init_point"]["kind"], "Point");
    assert_eq!(report["data"]["init_point"]["a"], serde_json::json!(["2", "1"]));
    // c = r(a)^2 = 25
    assert_eq!(report["data"]["even_power"]["c"], serde_json::json!(["25", "1"]));
    assert_eq!(report["data"]["even_power"]["report"]["holds"], true);
}

#[test]
fn probe_with_a_mismatched_witness_still_records() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("op.json"), r#"{"type": "IntegralFrom", "a": [2, 1]}"#).unwrap();
    // the witness of a plain integral is 1, not x^2 + 1: every block
    // records the mismatch, and the status stays 0
    let out = run(dir.path(), &["probe", "op.json", "x^2 + 1", "--bound", "10"]);
    assert_eq!(code(&out), 0);
    let report = report(&out);
    assert_eq!(report["verdict"], "recorded");
    assert_eq!(report["data"]["numerator"]["constant"], false);
    assert_eq!(report["data"]["denominator"]["constant"], false);
    assert!(report["data"]["init_point"]["refused"].is_string());
    assert!(report["data"]["even_power"]["refused"].is_string());
}

#[test]
fn malformed_specs_are_input_errors() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("op.json"), "{\"type\": \"Unknown\"}").unwrap();
    let out = run(dir.path(), &["verify", "op.json"]);
    assert_eq!(code(&out), 2);
    assert_eq!(report(&out)["verdict"], "input-error");
    assert!(!out.stderr.is_empty());

    // a family that parses but fails validation is refused the same way
    fs::write(
        dir.path().join("fam.json"),
        r#"{
            "variant": "Nondegenerate",
            "avg": {"d": 1, "sigma": [1]},
            "beta_rule": {"rule": "ReciprocalTheta", "c": [0, 1]}
        }"#,
    )
    .unwrap();
    let out = run(
        dir.path(),
        &["construct", "fam.json", "--out", "t.csv"],
    );
    assert_eq!(code(&out), 2);

    let out = run(dir.path(), &["verify", "missing.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("op.json"), FAMILY_OP_SPEC).unwrap();
    let first = run(dir.path(), &["verify", "op.json", "--bound", "12"]);
    let second = run(dir.path(), &["verify", "op.json", "--bound", "12"]);
    assert_eq!(first.stdout, second.stdout);

    fs::write(dir.path().join("fam.json"), FAMILY_SPEC).unwrap();
    let first = run(
        dir.path(),
        &["construct", "fam.json", "--out", "t.csv", "--bound", "25"],
    );
    let table_first = fs::read(dir.path().join("t.csv")).unwrap();
    let second = run(
        dir.path(),
        &["construct", "fam.json", "--out", "t.csv", "--bound", "25"],
    );
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(table_first, fs::read(dir.path().join("t.csv")).unwrap());
}

#[test]
fn selftest_runs_single_criteria() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["selftest", "--suite", "9"]);
    assert_eq!(code(&out), 0);
    let report = report(&out);
    assert_eq!(report["verdict"], "passed");
    assert_eq!(report["data"]["criteria"][0]["id"], 9);
    assert_eq!(report["data"]["criteria"][0]["passed"], true);
    // progress lines go to stderr, never into the report stream
    assert!(!out.stderr.is_empty());

    let out = run(dir.path(), &["selftest", "--suite", "99"]);
    assert_eq!(code(&out), 2);

    let out = run(dir.path(), &["selftest", "--suite", "ten"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn selftest_reports_are_stable_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let first = run(dir.path(), &["selftest", "--suite", "10", "--seed", "5"]);
    let second = run(dir.path(), &["selftest", "--suite", "10", "--seed", "5"]);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
}
