use std::path::PathBuf;
use std::process::{Command, Output};

use koszul_core::io::parse_system;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_koszul"))
}

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(&[args, &["--output", "json"]].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn invalid_type_is_a_domain_error() {
    let out = run(&["dims", "--type", "1,2,1,1,2"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "invalid_type");
    assert!(err["error"]["message"].as_str().unwrap().contains("invalid 2-bilinear type"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["solve"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["dims", "--output", "yaml", "--type", "1,1,1,2,1"]).status.code(), Some(2));
}

#[test]
fn missing_file_and_bad_field_are_domain_errors() {
    assert_eq!(run(&["solve", "--system", "/nonexistent.json"]).status.code(), Some(1));
    let sys = example("paper_2_1_1.json");
    let out = run(&["resultant", "--system", sys.to_str().unwrap(), "--field", "fp:10"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["oracle", "--system", sys.to_str().unwrap(), "--field", "q"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["matrix", "--type", "1,1,1,2,1", "--degree-vector", "2,2,-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_is_deterministic_and_records_randomization() {
    let sys = example("planted_2_1_1_2_2.json");
    let args = ["solve", "--system", sys.to_str().unwrap(), "--seed", "17"];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a, b);
    assert_eq!(a["version"], koszul_core::VERSION);
    assert_eq!(a["config"]["seed"], 17);
    let rnd = &a["result"]["randomization"];
    for key in ["seed", "attempt_seed", "retries", "theta", "f0", "coordinate_change", "options"] {
        assert!(!rnd[key].is_null(), "{key}");
    }
    assert_eq!(a["result"]["solutions"].as_array().unwrap().len(), 4);
}

#[test]
fn json_systems_round_trip() {
    for name in ["paper_2_1_1.json", "planted_1_1_1_2_1.json", "planted_1_0_1_1_1.json"] {
        let path = example(name);
        let original = koszul_core::io::load_system(&path).unwrap();
        for cmd in ["solve", "oracle"] {
            let v = json(&[cmd, "--system", path.to_str().unwrap()]);
            let back = parse_system(&v["result"]["system"].to_string()).unwrap();
            assert_eq!(back, original, "{cmd} {name}");
        }
    }
}

#[test]
fn oracle_lists_points_over_the_prime_field() {
    let sys = example("paper_2_1_1.json");
    let v = json(&["oracle", "--system", sys.to_str().unwrap(), "--field", "fp:31"]);
    let sols = v["result"]["solutions"].as_array().unwrap();
    assert_eq!(sols.len(), 2);
    assert_eq!(sols[1]["x"], serde_json::json!([1, 3]));
}

#[test]
fn matrix_csv_has_labelled_rows() {
    let sys = example("paper_2_1_1.json");
    let out = run(&["matrix", "--system", sys.to_str().unwrap(), "--output", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert!(lines[0].starts_with("row,"));
    let symbolic = json(&["matrix", "--type", "1,1,1,2,1"]);
    assert_eq!(symbolic["result"]["nnz"], 48);
    assert_eq!(symbolic["result"]["theta"]["split"], 8);
}

#[test]
fn resultant_over_both_fields() {
    let sys = example("paper_2_1_1.json");
    let q = json(&["resultant", "--system", sys.to_str().unwrap()]);
    let p = json(&["resultant", "--system", sys.to_str().unwrap(), "--field", "fp:10007"]);
    let dq: i64 = q["result"]["det"].as_str().unwrap().parse().unwrap();
    let dp: i64 = p["result"]["det"].as_str().unwrap().parse().unwrap();
    assert_eq!(dq.rem_euclid(10007), dp);
    let planted = example("planted_1_1_1_2_1.json");
    let out = run(&["resultant", "--system", planted.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "planted fixtures carry no f0");
}

#[test]
fn selftest_and_dims() {
    let v = json(&["selftest-paper"]);
    assert_eq!(v["result"]["all_pass"], true);
    let d = json(&["dims", "--type", "1,1,1,2,1", "--degree-vector", "0,-1,1"]);
    assert_eq!(d["result"]["mu"], 10);
    assert_eq!(d["result"]["terms"]["check"]["determinantal"], true);
    let s = json(&["search-dv", "--type", "1,1,1,2,1", "--box", "-1:2"]);
    let linear: Vec<&str> = s["result"]["vectors"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|v| v["linear"] == true)
        .map(|v| v["m"].as_str().unwrap())
        .collect();
    assert_eq!(linear, ["(0,-1,1)", "(0,2,-1)", "(2,-1,1)", "(2,2,-1)"]);
}
