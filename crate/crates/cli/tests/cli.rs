use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn scratch(name: &str, body: &Value) -> PathBuf {
    let p = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, serde_json::to_string_pretty(body).unwrap()).unwrap();
    p
}

fn shdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shdisc")).args(args).output().unwrap()
}

fn run_on(cmd: &str, input: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--input", input.to_str().unwrap()];
    args.extend_from_slice(extra);
    shdisc(&args)
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn sh2_example_audits_clean() {
    let o = run_on("audit", &fixture("sh2.json"), &["--profile", "finite-sh2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("all PASS"));
}

#[test]
fn stationarity_violation_exits_one_with_witness() {
    let o = run_on("audit", &fixture("stationarity_violation.json"), &[]);
    assert_eq!(code(&o), 1);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("F7    FAIL") && out.contains("witness:"), "{out}");
    assert!(out.contains("violated: F7"));

    let j = stdout_json(&run_on("audit", &fixture("stationarity_violation.json"), &["--format", "json"]));
    let failed: Vec<&str> = j["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["verdict"] == "FAIL")
        .map(|r| r["axiom"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["F7"]);
}

#[test]
fn missing_delta_is_an_input_error() {
    let o = run_on("audit", &fixture("missing_delta.json"), &[]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("delta") && err.contains("line 7"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_json_reports_position() {
    let p = Path::new(env!("CARGO_TARGET_TMPDIR")).join("trailing_comma.json");
    std::fs::write(&p, "{\n  \"schema\": \"1\",\n  \"weights\": [1.0, 0.9,]\n}\n").unwrap();
    let o = run_on("classify", &p, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let bad_schema = scratch("schema2.json", &json!({ "schema": "2", "weights": [1.0] }));
    assert_eq!(code(&run_on("classify", &bad_schema, &[])), 2);
}

#[test]
fn json_output_is_byte_stable() {
    for (cmd, file, extra) in [
        ("audit", "stationarity_violation.json", vec!["--seed", "11"]),
        ("audit", "sh2.json", vec![]),
        ("elicit", "infinite_sh3.json", vec!["--T", "auto"]),
        ("fit", "relation.json", vec![]),
    ] {
        let mut args = extra.clone();
        args.extend(["--format", "json"]);
        let a = run_on(cmd, &fixture(file), &args);
        let b = run_on(cmd, &fixture(file), &args);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{cmd} {file}");
    }
    let a = shdisc(&["generate", "--target", "F8", "--seed", "42", "--format", "json"]);
    let b = shdisc(&["generate", "--target", "F8", "--seed", "42", "--format", "json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

/// Feed every failing witness of an audit back through `compare`.
fn witnesses_replay(input: &Path, tag: &str) -> usize {
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(input).unwrap()).unwrap();
    let report = stdout_json(&run_on("audit", input, &["--format", "json"]));
    let mut replayed = 0;
    for (k, r) in report["results"].as_array().unwrap().iter().enumerate() {
        if r["witness"].is_null() {
            continue;
        }
        let body = json!({
            "schema": "1",
            "prizes": doc["prizes"],
            "anchor": doc["anchor"],
            "representation": doc["representation"],
            "witness": r["witness"],
        });
        let o = run_on("compare", &scratch(&format!("witness_{tag}_{k}.json"), &body), &["--format", "json"]);
        assert_eq!(code(&o), 0, "{tag} {}: {}", r["axiom"], String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout_json(&o)["mismatches"], 0);
        replayed += 1;
    }
    replayed
}

#[test]
fn printed_witnesses_reverify_through_compare() {
    assert_eq!(witnesses_replay(&fixture("stationarity_violation.json"), "qh"), 1);
    for target in ["F5", "F6", "F7", "F7'", "F8", "I6"] {
        for seed in [1u64, 2, 3] {
            let g = shdisc(&["generate", "--target", target, "--seed", &seed.to_string(), "--format", "json"]);
            assert_eq!(code(&g), 0);
            let gen = stdout_json(&g);
            let tag = format!("{}_{seed}", target.replace('\'', "p"));
            let path = scratch(&format!("gen_{tag}.json"), &gen);
            let audit = run_on("audit", &path, &["--format", "json"]);
            assert_eq!(code(&audit), 1, "{tag}");
            let failed: Vec<Value> = stdout_json(&audit)["results"]
                .as_array()
                .unwrap()
                .iter()
                .filter(|r| r["verdict"] != "PASS" && r["verdict"] != "NOT_APPLICABLE")
                .map(|r| r["axiom"].clone())
                .collect();
            assert_eq!(Value::Array(failed), gen["expected_failures"], "{tag}");
            if target != "I6" {
                assert!(witnesses_replay(&path, &tag) >= 1, "{tag}");
            }
        }
    }
}

#[test]
fn compare_flags_a_tampered_witness() {
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(fixture("stationarity_violation.json")).unwrap()).unwrap();
    let report = stdout_json(&run_on("audit", &fixture("stationarity_violation.json"), &["--format", "json"]));
    let mut w = report["results"].as_array().unwrap().iter().find(|r| r["axiom"] == "F7").unwrap()["witness"].clone();
    w["comparisons"][1]["verdict"] = json!("<");
    let body = json!({
        "schema": "1",
        "prizes": doc["prizes"],
        "anchor": doc["anchor"],
        "representation": doc["representation"],
        "witness": w,
    });
    let o = run_on("compare", &scratch("tampered.json", &body), &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("MISMATCH"));
}

#[test]
fn elicitation_recovers_hidden_model() {
    let o = run_on("elicit", &fixture("infinite_sh3.json"), &["--format", "json"]);
    assert_eq!(code(&o), 0);
    let j = stdout_json(&o);
    assert_eq!(j["status"], "ACCEPTED");
    assert_eq!(j["model"]["T"], 3);
    assert_eq!(j["horizon"], "infinite");
    assert!((j["model"]["delta"].as_f64().unwrap() - 0.9).abs() < 1e-6);
    let betas: Vec<f64> = j["model"]["betas"].as_array().unwrap().iter().map(|b| b.as_f64().unwrap()).collect();
    assert!((betas[0] - 0.5 / 0.9).abs() < 1e-6 && (betas[1] - 0.8).abs() < 1e-6);
    assert!(j["diagnostics"]["queries"].as_u64().unwrap() > 0);
    assert_eq!(j["diagnostics"]["verdict_agreement"], 1.0);
}

#[test]
fn elicitation_rejects_a_fixed_horizon_that_is_too_short() {
    let o = run_on("elicit", &fixture("infinite_sh3.json"), &["--T", "1", "--format", "json"]);
    assert_eq!(code(&o), 1);
    let j = stdout_json(&o);
    assert_eq!(j["status"], "REJECTED");
    assert!(j["axiom"].as_str().unwrap().starts_with('I'));
}

#[test]
fn classify_reports_class_and_exit_status() {
    let o = run_on("classify", &fixture("weights.json"), &["--format", "json"]);
    assert_eq!(code(&o), 0);
    let j = stdout_json(&o);
    assert_eq!(j["class"], "SH");
    assert_eq!(j["model"]["T"], 3);

    let qh = scratch("qh_weights.json", &json!({ "schema": "1", "weights": [1.0, 0.45, 0.405, 0.3645] }));
    assert_eq!(stdout_json(&run_on("classify", &qh, &["--format", "json"]))["class"], "QUASI_HYPERBOLIC");

    let rising = scratch("rising_weights.json", &json!({ "schema": "1", "weights": [1.0, 0.9, 0.45, 0.405, 0.3645] }));
    let o = run_on("classify", &rising, &["--format", "json"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout_json(&o)["class"], "NONE");
}

#[test]
fn fit_finds_weights_or_a_conflict() {
    let o = run_on("fit", &fixture("relation.json"), &["--format", "json"]);
    assert_eq!(code(&o), 0);
    let j = stdout_json(&o);
    assert_eq!(j["status"], "FEASIBLE");
    let w: Vec<f64> = j["weights"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(w[0] > w[1] && w[1] > 0.0);

    let cycle = json!({
        "schema": "1",
        "prizes": ["a", "z", "b"],
        "u": {"a": 1.0, "z": 0.0, "b": -1.0},
        "relation": {
            "streams": [{"periods": ["a", "z"]}, {"periods": ["z", "a"]}, {"periods": ["z", "z"]}],
            "verdicts": [["=", ">", "<"], ["<", "=", ">"], [">", "<", "="]]
        }
    });
    let o = run_on("fit", &scratch("cycle.json", &cycle), &["--format", "json"]);
    assert_eq!(code(&o), 1);
    let j = stdout_json(&o);
    assert_eq!(j["status"], "INFEASIBLE");
    assert!(!j["conflict"].as_array().unwrap().is_empty());
}

#[test]
fn eval_and_compare_use_the_representation() {
    let j = stdout_json(&run_on("eval", &fixture("sh2.json"), &["--format", "json"]));
    let v: Vec<f64> = j["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 0.63).abs() < 1e-12);
    assert!((v[2] - (0.125 - 0.75 * 0.63 + 0.63 * 0.9)).abs() < 1e-12);
    let c = stdout_json(&run_on("compare", &fixture("sh2.json"), &["--format", "json"]));
    assert_eq!(c["comparisons"][0]["verdict"], ">");
    assert_eq!(c["comparisons"][1]["verdict"], "<");
}

#[test]
fn generate_requires_a_seed() {
    let o = shdisc(&["generate", "--target", "F8"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&shdisc(&["generate", "--target", "F9", "--seed", "1"])), 2);
}

#[test]
fn flags_reach_the_testbed() {
    let j = stdout_json(&run_on(
        "audit",
        &fixture("sh2.json"),
        &["--lambda-grid", "0,0.5,1", "--horizon-cap", "50", "--seed", "5", "--format", "json"],
    ));
    assert_eq!(j["testbed"]["grid"], json!([0.0, 0.5, 1.0]));
    assert_eq!(j["testbed"]["horizon_cap"], 50);
    assert_eq!(j["testbed"]["seed"], 5);
}

#[test]
fn strict_beta_mode_is_opt_in() {
    let flat = scratch("flat_betas.json", &json!({ "schema": "1", "weights": [1.0, 0.72, 0.5184, 0.46656, 0.419904] }));
    assert_eq!(code(&run_on("classify", &flat, &[])), 0);
    let o = run_on("classify", &flat, &["--strict-betas", "--format", "json"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout_json(&o)["strict_betas"], false);
    assert_eq!(code(&run_on("classify", &fixture("weights.json"), &["--strict-betas"])), 0);
}
