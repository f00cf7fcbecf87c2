use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_padic-deform"));
    c.env_remove("PADIC_DEFORM_MAX_E");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn schema() -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::draft202012::new(&schema).expect("schema compiles")
}

/// Run with --format json, check the exit code, validate the output and return it.
fn json(args: &[&str], code: i32) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = run(&all);
    assert_eq!(out.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    let validator = schema();
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}\n{v:#}");
    v
}

#[test]
fn tate_good_reduction() {
    let v = json(&["tate", "--p", "5", "--n", "1", "--curve", "0,0,0,1,1"], 0);
    assert_eq!(v["result"]["kodaira"], "I0");
    assert_eq!(v["result"]["f"], 0);
    assert_eq!(v["root_number"]["w"], 1);
}

#[test]
fn tate_split_multiplicative() {
    let v = json(&["tate", "--p", "2", "--curve", "1,0,0,0,t"], 0);
    assert_eq!(v["result"]["kodaira"], "I1");
    assert_eq!(v["result"]["reduction"], "MultSplit");
    assert_eq!(v["result"]["f"], 1);
    assert_eq!(v["root_number"]["w"], -1);
}

#[test]
fn named_coefficients_match_comma_list() {
    let a = json(&["tate", "--p", "7", "--curve", "0,0,0,t,1+t^2"], 0);
    let b = json(&["tate", "--p", "7", "--curve", "a6=1+t^2, a4=t"], 0);
    assert_eq!(a["result"], b["result"]);
}

#[test]
fn malformed_literal_reports_column() {
    let v = json(&["tate", "--p", "2", "--curve", "1,0,0,0,t+"], 2);
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(v["error"]["column"], 11);
    let out = run(&["tate", "--p", "2", "--curve", "1,0,0,0,t*)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column 11"));
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(run(&["tate", "--p", "4", "--curve", "0,0,0,1,1"]).status.code(), Some(2));
    assert_eq!(run(&["tate", "--p", "5", "--curve", "0,0,0,0,0"]).status.code(), Some(2));
    assert_eq!(run(&["tate", "--p", "5", "--curve", "0,0,0,0,1/t"]).status.code(), Some(2));
    // x^2 - x + 1 is reducible over F_4
    let reducible = run(&["deform", "--p", "2", "--n", "2", "--curve", "1,0,0,0,t", "--twist", r#"{"kind":"artin_schreier","gamma":"1"}"#]);
    assert_eq!(reducible.status.code(), Some(2));
    assert_eq!(run(&["tate", "--p", "5"]).status.code(), Some(2));
}

#[test]
fn twist_echoes_normalized_datum() {
    let v = json(&["twist", "--p", "5", "--curve", "0,0,0,1,1", "--twist", r#"{"kind":"sqrt_d","d":"t^3"}"#], 0);
    assert_eq!(v["twist"]["param"], "t");
    assert_eq!(v["twist"]["disc_val"], 1);
    assert_eq!(v["twist_result"]["v_delta"], 6);
}

#[test]
fn nonreduced_gamma_is_normalized() {
    let v = json(&["deform", "--p", "2", "--curve", "1,0,0,0,t", "--twist", r#"{"kind":"artin_schreier","gamma":"1/t^4"}"#], 0);
    assert_eq!(v["twist"]["param"], "1/t");
    assert_eq!(v["twist"]["disc_val"], 2);
    assert_eq!(v["deformed_twist"]["disc_val"], 2);
    assert_eq!(v["all_matched"], true);
}

#[test]
fn good_reduction_deform_matches() {
    let v = json(&["deform", "--p", "5", "--curve", "0,0,0,1,1", "--twist", r#"{"kind":"sqrt_d","d":"2"}"#], 0);
    assert_eq!(v["all_matched"], true);
    assert!(v["entries"].as_array().unwrap().iter().all(|e| e["matched"] == true || e["unsupported"] == true));
}

#[test]
fn forced_cap_exits_3() {
    let v = json(
        &["deform", "--p", "2", "--curve", "1,0,0,0,t", "--twist", r#"{"kind":"artin_schreier","gamma":"1/t^5"}"#, "--max-e", "2"],
        3,
    );
    assert_eq!(v["error"]["kind"], "precision_cap_exceeded");
    let out = bin()
        .args(["deform", "--p", "2", "--curve", "1,0,0,0,t", "--twist", r#"{"kind":"artin_schreier","gamma":"1/t^5"}"#])
        .env("PADIC_DEFORM_MAX_E", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn kt_check_report() {
    let v = json(&["kt-check", "--p", "2", "--curve", "1,0,0,0,t", "--twist", r#"{"kind":"artin_schreier","gamma":"1/t"}"#], 0);
    assert_eq!(v["kt_status"], "verified");
    assert_eq!(v["k"]["kt_parity"], v["k_prime"]["kt_parity"]);
    let names: Vec<&str> = v["entries"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"kt_parity") && !names.contains(&"kodaira"));
}

#[test]
fn sweep_is_deterministic() {
    let args = ["sweep", "--p", "3", "--count", "25", "--seed", "11", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    json(&["sweep", "--p", "3", "--count", "25", "--seed", "11"], 0);
}

#[test]
fn empty_sweep() {
    let v = json(&["sweep", "--p", "2", "--count", "0"], 0);
    assert_eq!(v["cases_ok"], 0);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn selftest_passes() {
    let v = json(&["selftest"], 0);
    assert_eq!(v["passed"], true);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for n in ["truncated_ring_isomorphism", "normalized_gamma_discriminant", "split_multiplicative_root_number"] {
        assert!(names.contains(&n), "{n}");
    }
}

#[test]
fn text_format_is_stable() {
    let a = run(&["tate", "--p", "2", "--curve", "1,0,0,0,t"]);
    let b = run(&["tate", "--p", "2", "--curve", "1,0,0,0,t"]);
    assert_eq!(a.stdout, b.stdout);
    let s = String::from_utf8(a.stdout).unwrap();
    assert!(s.contains("kodaira: I1") && s.contains("w: -1"));
}
