//! End-to-end runs of the `zonalval` binary.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use zonalval::dspace::ZonalDensity;
use zonalval::valuations::phi_cone;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zonalval")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("zonalval-cli-{}-{name}", std::process::id()))
}

#[test]
fn eval_uses_closed_forms() {
    let v = json(&["eval", "--density", "power:0.25", "--body", "cone:1"]);
    let want = phi_cone(3, 1, &ZonalDensity::power(0.5, 0.25).unwrap(), 1.0).unwrap();
    assert_eq!(v["backend"], "closed-form");
    assert!((v["value"].as_f64().unwrap() - want).abs() <= 1e-12 * want);

    let v = json(&["eval", "--density", "poly:[0,1]", "--body", "cone:1"]);
    assert!(v["value"].as_f64().unwrap().abs() <= 1e-12);

    let v = json(&["eval", "--density", "poly:[1]", "--body", "ball:1"]);
    assert!((v["value"].as_f64().unwrap() - 4.0 * PI).abs() <= 1e-10);
}

#[test]
fn invalid_requests_exit_with_code_two() {
    assert_eq!(run(&["eval", "--density", "const:1", "--body", "cube"]).status.code(), Some(2));
    assert_eq!(run(&["--j", "5", "eval", "--density", "const:1", "--body", "cone:1"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--density", "nonsense", "--body", "cone:1"]).status.code(), Some(2));
}

#[test]
fn cone_table_formats_agree() {
    let v = json(&["--grid", "8", "cone-table", "--density", "const:1"]);
    let rows = v["rows"].as_array().unwrap();
    let out = run(&["--grid", "8", "--format", "csv", "cone-table", "--density", "const:1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,h,phi,measure"));
    let mut count = 0;
    for (line, row) in lines.zip(rows) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        for (k, key) in ["s", "h", "phi", "measure"].iter().enumerate() {
            assert_eq!(cells[k], row[key].as_f64().unwrap());
        }
        assert!((cells[2] - cells[3]).abs() <= 1e-10 * cells[3]);
        count += 1;
    }
    assert_eq!(count, rows.len());
}

#[test]
fn ja_of_a_constant_profile() {
    // for u ≡ c the inverse transform is f = c|s|/2, so g = f (1 - s^2)^(1/2) at a = 1/2
    let path = scratch("const.csv");
    let mut csv = String::from("s,u\n-1,2\n1,2\n");
    for k in 0..129 {
        csv.push_str(&format!("{},2\n", (PI * (k as f64 + 0.5) / 129.0).cos()));
    }
    std::fs::write(&path, csv).unwrap();
    let out = run(&["--format", "csv", "transform", "ja", "--input", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut worst: f64 = 0.0;
    for line in text.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let (s, g) = (cells[0], cells[2]);
        worst = worst.max((g - s.abs() * (1.0 - s * s).sqrt()).abs());
    }
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn steiner_check_is_reproducible_across_threads() {
    let args =
        |t: &'static str| ["--seed", "3", "--samples", "200000", "--threads", t, "steiner-check", "--body", "cube"];
    let one = run(&args("1"));
    let four = run(&args("4"));
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let v: Value = serde_json::from_slice(&one.stdout).unwrap();
    let s1 = &v["totals"][1];
    let (mass, se) = (s1["mass"].as_f64().unwrap(), s1["stderr"].as_f64().unwrap());
    assert!((mass - 3.0 * PI).abs() <= 3.0 * se, "{mass} ± {se}");
}

#[test]
fn output_file_matches_stdout() {
    let path = scratch("eval.json");
    let args = ["eval", "--density", "power:0.25", "--body", "cone:-2"];
    let direct = run(&args);
    let mut with_out = vec!["--out", path.to_str().unwrap()];
    with_out.extend(args);
    assert!(run(&with_out).status.success());
    let written = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(written, direct.stdout);
}
