use std::process::{Command, Output};

use serde_json::Value;

fn exvortex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exvortex")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = exvortex(args);
    let code = out.status.code().expect("exit code");
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, json)
}

#[test]
fn verify_olesen() {
    let (code, r) = report(&["verify", "--olesen", "--lattice", "1,1", "--res", "128"]);
    assert_eq!(code, 0);
    let o = &r["outputs"];
    assert_eq!(o["k"], 4);
    assert!(o["residual"]["sup"].as_f64().unwrap() < 1e-6);
    assert_eq!(o["zeros"].as_array().unwrap().len(), 4);
    assert_eq!(o["half_period_symmetric"], true);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["ledger_hash"].as_str().unwrap(), exotic_vortex::conventions::ledger_hash());
    assert!(r["timings"]["total_ms"].as_f64().is_some());
}

#[test]
fn verify_rational_on_sphere() {
    let (code, r) = report(&["verify", "--rational", "z^2", "--sphere", "--kappa", "1", "--res", "128"]);
    assert_eq!(code, 0);
    assert_eq!(r["outputs"]["k"], 2);
    assert_eq!(r["outputs"]["expected_k"], 2);
}

#[test]
fn verify_map_json() {
    let spec = r#"{"kind":"quarter_cell","lattice":{"omega1":[1,0],"omega2":[0,1]}}"#;
    let (code, r) = report(&["verify", "--map", spec, "--res", "64"]);
    assert_eq!(code, 0);
    assert_eq!(r["outputs"]["k"], 1);
    assert_eq!(r["outputs"]["twist_class"], 1);
}

#[test]
fn malformed_map_is_exit_2() {
    let out = exvortex(&["verify", "--rational", "(z^2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
    assert!(out.stdout.is_empty());
    assert_eq!(exvortex(&["verify", "--map", "{\"kind\":"]).status.code(), Some(2));
    // missing map source is a usage error
    assert_eq!(exvortex(&["verify"]).status.code(), Some(2));
}

#[test]
fn precondition_is_exit_3() {
    assert_eq!(exvortex(&["verify", "--olesen", "--sphere"]).status.code(), Some(3));
    assert_eq!(exvortex(&["verify", "--olesen", "--lattice", "1,0,0.5,1"]).status.code(), Some(3));
}

#[test]
fn tolerance_failure_is_exit_4() {
    let (code, r) = report(&["verify", "--olesen", "--res", "64", "--residual-tol", "1e-15"]);
    assert_eq!(code, 4);
    assert_eq!(r["passed"], false);
    assert_eq!(r["outputs"]["k"], 4);
}

#[test]
fn matrix_residual_forms() {
    let (code, r) = report(&["verify", "--polynomial", "z,z^2", "--res", "96", "--residual-form", "identity"]);
    assert_eq!(code, 0);
    assert_eq!(r["outputs"]["k"], 2);
    assert!(r["outputs"]["residual"]["sup"].as_f64().unwrap() < 1e-4);
}

#[test]
fn newton_polish_from_perturbed_start() {
    let (code, r) = report(&["verify", "--olesen", "--res", "64", "--polish", "--perturb", "1e-3"]);
    assert_eq!(code, 0);
    let n = &r["outputs"]["newton"];
    assert!(n["iterations"].as_u64().unwrap() <= 5);
    assert!(n["final_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn reports_are_deterministic_without_timings() {
    let args = ["verify", "--olesen", "--res", "64", "--no-timings"];
    let (a, b) = (exvortex(&args), exvortex(&args));
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(r.get("timings").is_none());
}

#[test]
fn help_lists_tolerances() {
    let help = |cmd: &str| String::from_utf8(exvortex(&[cmd, "--help"]).stdout).unwrap();
    let verify = help("verify");
    assert!(verify.contains("--residual-tol") && verify.contains("1e-5 sphere, 1e-6 torus, 1e-4 matrix"));
    assert!(verify.contains("--flux-tol") && verify.contains("[default: 0.001]"));
    assert!(verify.contains("--newton-tol"));
    let uni = help("uniformize");
    assert!(uni.contains("--mean-tol") && uni.contains("--curvature-tol"));
    let w = help("weierstrass");
    assert!(w.contains("--identity-tol") && w.contains("--sum-tol"));
    assert!(help("count").contains("--area-tol"));
    assert!(help("sample").contains("chart,x,y,weight,rho,b"));
}

#[test]
fn count_examples() {
    let (code, r) = report(&["count", "--genus", "0", "--nf", "1", "--level", "-1", "--area", "0", "--k", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["outputs"]["witten_index"], 6);
    assert_eq!(r["outputs"]["bradlow"]["satisfied"], true);
    // non-integer top argument
    let (code, _) = report(&["count", "--area", "1/2", "--k", "2"]);
    assert_eq!(code, 3);
    // geometric area snapped to 3
    let (code, r) = report(&["count", "--area-approx", "3.0000000000001", "--k", "1"]);
    assert_eq!(code, 0);
    assert_eq!(r["inputs"]["area"], "3");
    assert_eq!(r["outputs"]["gated_index"], 0);
}

#[test]
fn count_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let (code, _) = report(&["count", "--table", path.to_str().unwrap(), "--k-max", "4"]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,witten_index,gated_index,bradlow");
    assert_eq!(lines[1..], ["0,1,0,false", "1,2,2,true", "2,6,6,true", "3,20,20,true", "4,70,70,true"]);
}

#[test]
fn selection_and_index() {
    let (code, r) = report(&["selection", "--n", "2", "--genus", "0"]);
    assert_eq!(code, 0);
    assert_eq!(r["outputs"]["description"], "k ≡ 2 mod 3");
    let (code, _) = report(&["selection", "--n", "1", "--genus", "0", "--class", "1"]);
    assert_eq!(code, 3);
    let (_, r) = report(&["selection", "--n", "1", "--genus", "1", "--class", "1"]);
    assert_eq!(r["outputs"]["description"], "k ≡ 1 mod 2");
    let (code, r) = report(&["index", "--which", "flat", "--genus", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["outputs"]["value"], 6);
    let (_, r) = report(&["index", "--genus", "1", "--k", "3"]);
    assert_eq!(r["outputs"]["combined_abelian"], 6);
    assert_eq!(r["outputs"]["vortex"], 6);
}

#[test]
fn uniformize_examples() {
    let (code, r) = report(&["uniformize", "--constant", "0.4", "--res", "32"]);
    assert_eq!(code, 0);
    assert!(r["outputs"]["f0_sup"].as_f64().unwrap() < 1e-14);
    let (code, r) = report(&["uniformize", "--cos", "0.3", "--res", "128", "--olesen"]);
    assert_eq!(code, 0);
    assert!(r["outputs"]["curvature_deviation"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["outputs"]["olesen"]["k"], 4);
    let (code, _) = report(&["uniformize", "--cos", "0.3", "--res", "32", "--kappa0", "1"]);
    assert_eq!(code, 3);
}

#[test]
fn uniformize_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let n = 8;
    let g: Vec<String> = (0..n * n).map(|i| format!("{}", ((i % n) as f64 * 0.7).sin() * 0.1)).collect();
    let json =
        format!(r#"{{"lattice":{{"omega1":[1,0],"omega2":[0,1]}},"log_density":[{}],"resolution":{n}}}"#, g.join(","));
    std::fs::write(&path, json).unwrap();
    let csv = dir.path().join("f.csv");
    let (code, r) = report(&["uniformize", "--problem", path.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{r}");
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("x,y,g0,f0\n"));
    assert_eq!(text.lines().count(), n * n + 1);
}

#[test]
fn weierstrass_checks() {
    let (code, r) = report(&["weierstrass", "--lattice", "1,1.5", "--at", "0.3,0.2"]);
    assert_eq!(code, 0);
    let o = &r["outputs"];
    assert!(o["identity"]["max_relative_error"].as_f64().unwrap() < 1e-10);
    assert_eq!(o["real_values"]["passed"], true);
    assert_eq!(o["values"].as_array().unwrap().len(), 1);
    assert_eq!(exvortex(&["weierstrass", "--at", "0,0"]).status.code(), Some(3));
}

#[test]
fn sample_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let (code, r) = report(&["sample", "--rational", "z^3", "--res", "16", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let rows = exotic_vortex::io::read_field_csv(std::fs::File::open(path).unwrap()).unwrap();
    assert_eq!(rows.len() as u64, r["outputs"]["points"].as_u64().unwrap());
    let flux: f64 = rows.iter().map(|row| row.weight * row.b).sum::<f64>() / (2.0 * std::f64::consts::PI);
    assert!((flux - 4.0).abs() < 1e-3);
}
