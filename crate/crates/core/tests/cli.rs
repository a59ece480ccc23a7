use std::process::Command;

use serde_json::Value;

fn hmf(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hmf")).args(args).output().expect("run hmf");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// Every leaf number must sit under an "exact" or "mid"/"radius" wrapper, or be a count/index.
fn numbers_are_wrapped(v: &Value, key: &str) -> bool {
    match v {
        Value::Object(m) => m.iter().all(|(k, x)| numbers_are_wrapped(x, k)),
        Value::Array(a) => a.iter().all(|x| numbers_are_wrapped(x, key)),
        Value::Number(n) => {
            n.is_i64() || n.is_u64() || matches!(key, "box" | "height")
        }
        _ => true,
    }
}

#[test]
fn constant_terms_over_q() {
    let (code, out, _) = hmf(&["constant-terms", "--field", "Q", "--k", "4"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"1/240\""));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(numbers_are_wrapped(&v, ""));
}

#[test]
fn ledger_suite_exits_zero() {
    let (code, out, _) = hmf(&["verify", "q10-ledger"]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], Value::Bool(true));
}

#[test]
fn malformed_ideal_reports_position() {
    let (code, out, err) = hmf(&["ideals", "--field", "10", "--ideal", "[2, w + ]"]);
    assert_eq!(code, 2);
    assert!(err.contains("position"), "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["position"].as_u64().is_some());
}

#[test]
fn unsupported_scope_exits_three() {
    let (code, _, _) = hmf(&["field", "--field", r#"{"poly": [-1, -2, 1, 1]}"#]);
    assert_eq!(code, 3);
    let odd = r#"{"modulus": "sqrt(5)", "index": 1}"#;
    let (code, _, _) = hmf(&["lvalue", "--field", "5", "--chi", odd, "--s", "0"]);
    assert_eq!(code, 3);
    let (code, _, _) = hmf(&["constant-terms", "--field", "5", "--k", "1", "--psi", odd]);
    assert_eq!(code, 3);
    let (code, out, _) = hmf(&["lvalue", "--field", "5", "--s", "0"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"exact\": \"0\""), "{out}");
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "cusps", "--seed", "11"];
    let (a, x, _) = hmf(&args);
    let (b, y, _) = hmf(&args);
    assert_eq!((a, b), (0, 0));
    assert_eq!(x, y);
    let args = ["constant-terms", "--field", "10", "--k", "2", "--prec", "160"];
    assert_eq!(hmf(&args).1, hmf(&args).1);
}

#[test]
fn json_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("hmf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("field.json");
    let (code, out, _) = hmf(&["field", "--field", "10", "--json", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["discriminant"]["exact"], "40");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn oracles_agree_with_formulas() {
    let (code, out, _) = hmf(&["oracle-q", "--N", "5", "--k", "4", "--psi", "1", "--gamma", "1,0,1,1"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["difference"].as_str().unwrap().parse::<f64>().unwrap() < 1e-8);
    let (code, out, _) = hmf(&["oracle-f", "--field", "10", "--k", "4", "--lambda", "1", "--cusp", "1", "--box", "15"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let re: f64 = v["difference"]["re"].as_str().unwrap().parse().unwrap();
    assert!(re.abs() < 1e-3, "{re}");
}

#[test]
fn parity_violation_is_a_validation_error() {
    let (code, _, err) = hmf(&["constant-terms", "--field", "Q", "--k", "3"]);
    assert_eq!(code, 2, "{err}");
}
