use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nbl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let o = nbl(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn assert_schema(name: &str, instance: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn data_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn fit_mle_json() {
    let v = json(&["fit", "--data", "zaire", "--format", "json"]);
    assert_schema("fit_result.schema.json", &v);
    assert_eq!(v["method"], "mle");
    assert!((v["params"]["r"].as_f64().unwrap() - 0.486).abs() < 0.005);
    assert!((v["params"]["theta"].as_f64().unwrap() - 6.381).abs() < 0.05);
    assert!((v["logLikelihood"].as_f64().unwrap() + 1183.43).abs() < 0.01);
}

#[test]
fn fit_other_methods() {
    let m = json(&["fit", "--data", "zaire", "--method", "moments", "--format", "json"]);
    assert_schema("fit_result.schema.json", &m);
    assert!(m["stdErrors"].is_null());
    let em = json(&["fit", "--data", "zaire", "--method", "em", "--format", "json"]);
    assert_schema("fit_result.schema.json", &em);
    assert_eq!(em["method"], "em");
    assert_eq!(em["converged"], true);
}

#[test]
fn fit_table_and_files() {
    let dataset = nbl(&["dataset", "--name", "zaire"]);
    assert!(dataset.status.success());
    let f = data_file(&stdout(&dataset));
    let o = nbl(&["fit", "--data", f.path().to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("r               0.486"));
    assert!(text.contains("log-likelihood  -1183.42"));

    let out = tempfile::NamedTempFile::new().unwrap();
    let o = nbl(&["dataset", "--output", out.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(out.path()).unwrap(), stdout(&dataset));
}

#[test]
fn exit_codes() {
    // parse errors and bad arguments
    let empty = data_file("# nothing\n");
    assert_eq!(
        nbl(&["fit", "--data", empty.path().to_str().unwrap()]).status.code(),
        Some(2)
    );
    let bad = data_file("0 10\n1 x\n");
    let o = nbl(&["fit", "--data", bad.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(nbl(&["fit", "--data", "zaire", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(nbl(&["pmf", "--r", "1"]).status.code(), Some(2));
    assert_eq!(nbl(&["frobnicate"]).status.code(), Some(2));
    // NoRoot from underdispersed data
    let under = data_file("1 50\n2 50\n");
    let o = nbl(&["fit", "--data", under.path().to_str().unwrap(), "--method", "moments"]);
    assert_eq!(o.status.code(), Some(4));
    // EM stopped by the iteration cap
    let o = nbl(&[
        "fit",
        "--data",
        "zaire",
        "--method",
        "em",
        "--start-r",
        "1",
        "--start-theta",
        "2",
        "--max-iter",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(
        nbl(&["pmf", "--r", "-1", "--theta", "1", "--xmax", "3"]).status.code(),
        Some(2)
    );
    // failures inside the numerics
    let o = nbl(&[
        "compound",
        "--r",
        "1",
        "--theta",
        "1",
        "--severity",
        "0:0.5,1:0.5",
        "--ymax",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn pmf_table() {
    let v = json(&[
        "pmf", "--r", "0.486", "--theta", "6.381", "--xmax", "5", "--format", "json",
    ]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!((rows[0]["direct"].as_f64().unwrap() * 4000.0 - 3719.06).abs() < 0.01);
    assert!(v["maxRelativeDiscrepancy"].as_f64().unwrap() < 1e-8);
    let scaled = json(&[
        "pmf", "--r", "0.486", "--theta", "6.381", "--xmax", "2", "--scale", "4000", "--format", "json",
    ]);
    assert!((scaled["rows"][1]["scaled"].as_f64().unwrap() - 232.79).abs() < 0.01);
}

#[test]
fn pmf_small_cases() {
    let v = json(&["pmf", "--r", "1", "--theta", "1", "--xmax", "0", "--format", "json"]);
    assert!((v["rows"][0]["direct"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let v = json(&["pmf", "--r", "2", "--theta", "0.5", "--xmax", "40", "--format", "json"]);
    let cum: Vec<f64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["cumulative"].as_f64().unwrap())
        .collect();
    assert!(cum.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn unit_severity_reproduces_pmf() {
    let c = json(&[
        "compound",
        "--r",
        "1",
        "--theta",
        "1",
        "--severity",
        "1:1.0",
        "--ymax",
        "10",
        "--format",
        "json",
    ]);
    let p = json(&["pmf", "--r", "1", "--theta", "1", "--xmax", "10", "--format", "json"]);
    for y in 0..=10 {
        let a = c["values"][y].as_f64().unwrap();
        let b = p["rows"][y]["recursive"].as_f64().unwrap();
        assert!((a - b).abs() <= 1e-14 * b, "y={y}: {a} vs {b}");
    }
}

#[test]
fn gof_json() {
    let v = json(&[
        "gof", "--data", "zaire", "--r", "0.486", "--theta", "6.381", "--format", "json",
    ]);
    assert_schema("gof_report.schema.json", &v);
    assert_eq!(v["dof"], 1);
    assert!((v["chiSquare"].as_f64().unwrap() - 0.063).abs() < 1e-3);
    let pooled = json(&[
        "gof", "--data", "zaire", "--r", "0.486", "--theta", "6.381", "--tail", "pooled", "--format", "json",
    ]);
    assert_schema("gof_report.schema.json", &pooled);
    assert_eq!(pooled["cells"][3]["label"], "3+");
    let table = nbl(&["gof", "--data", "zaire", "--r", "0.486", "--theta", "6.381"]);
    assert!(stdout(&table).contains("p-value"));
}

#[test]
fn compound_json() {
    let unit = json(&[
        "compound",
        "--r",
        "1",
        "--theta",
        "1",
        "--severity",
        "1:1",
        "--ymax",
        "10",
        "--format",
        "json",
    ]);
    assert_schema("compound_distribution.schema.json", &unit);
    assert_eq!(unit["kind"], "discrete");
    assert!((unit["values"][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((unit["atomAtZero"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let cont = json(&[
        "compound",
        "--r",
        "1",
        "--theta",
        "1",
        "--severity",
        "exponential:1",
        "--ymax",
        "10",
        "--mesh",
        "100",
        "--check-mc",
        "100000",
        "--format",
        "json",
    ]);
    assert_schema("compound_distribution.schema.json", &cont);
    assert_eq!(cont["kind"], "continuous");
    let mc = &cont["monteCarlo"];
    assert_eq!(mc["draws"], 100000);
    assert_eq!(mc["deciles"].as_array().unwrap().len(), 9);
    assert!(mc["maxStdErrors"].as_f64().unwrap() < 4.0);

    let bad = nbl(&[
        "compound",
        "--r",
        "1",
        "--theta",
        "1",
        "--severity",
        "gamma:2",
        "--ymax",
        "10",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}
