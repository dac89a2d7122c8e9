use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polarfact"));
    c.env_remove("POLARFACT_TOL");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn line_measure(vals: &[f64]) -> Value {
    let w = 1.0 / vals.len() as f64;
    let points: Vec<Value> = vals
        .iter()
        .enumerate()
        .map(|(i, v)| json!({"label": format!("y{i}"), "coords": [v], "weight": w}))
        .collect();
    json!({"dimension": 1, "points": points})
}

fn abstract_map(values: &[f64], weights: &[f64]) -> Value {
    let points: Vec<Value> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| json!({"label": format!("x{i}"), "weight": w}))
        .collect();
    let vals: Vec<Value> = values.iter().map(|v| json!([v])).collect();
    json!({"measure": {"dimension": "abstract", "points": points}, "values": vals})
}

struct Files {
    _dir: tempfile::TempDir,
    u: PathBuf,
    y: PathBuf,
}

fn files(u: Value, y: Value) -> Files {
    let dir = tempfile::tempdir().unwrap();
    let u = write(dir.path(), "u.json", &u);
    let y = write(dir.path(), "y.json", &y);
    Files { _dir: dir, u, y }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_zero_cost_instance() {
    let f = files(abstract_map(&[1.0, 0.0], &[0.5, 0.5]), line_measure(&[0.0, 1.0]));
    let o = run(&["solve", "--u", s(&f.u), "--Y", s(&f.y)]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["certificate"]["I"], json!(0.0));
    assert_eq!(v["triplets"].as_array().unwrap().len(), 2);
}

#[test]
fn solve_with_oracle() {
    let vals = [0.3, -1.2, 2.5, 0.9, 1.7, -0.4];
    let f = files(abstract_map(&vals, &[1.0 / 6.0; 6]), line_measure(&[0.0, 0.5, 1.0, 1.5, 2.0, 2.5]));
    let o = run(&["solve", "--u", s(&f.u), "--Y", s(&f.y), "--oracle"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["oracle"]["agrees"], json!(true));
    let (a, b) = (v["oracle"]["optimum"].as_f64().unwrap(), v["certificate"]["I"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-9 * (1.0 + a));
}

#[test]
fn malformed_input_is_rejected_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"measure\": [1,\n 2,,]}").unwrap();
    let y = write(dir.path(), "y.json", &line_measure(&[0.0]));
    let o = run(&["solve", "--u", s(&bad), "--Y", s(&y)]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");

    let o = run(&["solve", "--Y", s(&y)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--u"));
}

#[test]
fn validation_failures_exit_2() {
    let f = files(abstract_map(&[1.0, 0.0], &[0.5, 0.7]), line_measure(&[0.0, 1.0]));
    assert_eq!(code(&run(&["solve", "--u", s(&f.u), "--Y", s(&f.y)])), 2);
    let f = files(abstract_map(&[1.0, 0.0], &[0.5, -0.5]), line_measure(&[0.0, 1.0]));
    assert_eq!(code(&run(&["factorize", "--u", s(&f.u), "--Y", s(&f.y)])), 2);
}

#[test]
fn factorize_classifications() {
    // identity on Y
    let y = line_measure(&[0.0, 1.0, 2.0]);
    let mut u = y.clone();
    u = json!({"measure": u, "values": [[0.0], [1.0], [2.0]]});
    let f = files(u, y);
    let o = run(&["factorize", "--u", s(&f.u), "--Y", s(&f.y)]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["classification"], json!("Factorisation"));
    assert_eq!(v["factor_map"], json!([0, 1, 2]));
    assert!(v["max_gap"].as_f64().unwrap() <= 1e-10);

    // masses 1/3, 2/3 against three sites of 1/3 force a split row
    let f = files(abstract_map(&[0.0, 1.5], &[1.0 / 3.0, 2.0 / 3.0]), line_measure(&[0.0, 1.0, 2.0]));
    let o = run(&["factorize", "--u", s(&f.u), "--Y", s(&f.y)]);
    assert_eq!(code(&o), 10);
    let v = stdout_json(&o);
    assert_eq!(v["classification"], json!("InclusionOnly"));
    assert_eq!(v["factor_map"], Value::Null);
}

#[test]
fn factorize_gallery_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let o = run(&["gallery", "--name", "injective-control", "--grid", "6", "--seed", "4", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["degeneracy_index"], json!(0.0));

    let (u, y) = (out.join("u.json"), out.join("Y.json"));
    let args = ["factorize", "--u", s(&u), "--Y", s(&y)];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn gallery_reports_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("flat");
    let o = run(&["gallery", "--name", "flat-segment", "--grid", "8", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    for f in ["u.json", "Y.json", "u_sharp.json", "heavy.json", "factorize.json", "report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let counts = report["zero_counts"].as_array().unwrap();
    assert_eq!(counts.len(), 64);
    assert!(counts.iter().all(|c| c.as_u64().unwrap() >= 4));
    assert_eq!(report["max_light_count"], json!(4));
    let (d, sp) = (report["degeneracy_index"].as_f64().unwrap(), report["split_index"].as_f64().unwrap());
    assert!(sp <= d + 1e-12);

    assert_eq!(code(&run(&["gallery", "--name", "flat-segment", "--grid", "7"])), 2);
    assert_eq!(code(&run(&["gallery", "--name", "no-such-instance"])), 2);

    let o = run(&["gallery", "--name", "m-to-1-flat", "--grid", "4", "--format", "text"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("degeneracy index"));
}

#[test]
fn verify_round_trip_and_failures() {
    // u ≡ 1/2: every site ties in the conjugate, so a 0.1 bump shows in full
    let f = files(abstract_map(&[0.5; 4], &[0.25; 4]), line_measure(&[0.0, 1.0, 2.0, 3.0]));
    let dir = f.u.parent().unwrap();
    let plan = dir.join("f.json");
    let o = run(&["factorize", "--u", s(&f.u), "--Y", s(&f.y), "--out", s(&plan)]);
    assert_eq!(code(&o), 0);
    let o = run(&["verify", "--u", s(&f.u), "--Y", s(&f.y), "--plan", s(&plan)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["optimal"], json!(true));
    assert!(v["delta"].as_f64().unwrap().abs() <= 1e-12);

    // the solve output carries φ instead of ψ
    let solved = dir.join("s.json");
    assert_eq!(code(&run(&["solve", "--u", s(&f.u), "--Y", s(&f.y), "--out", s(&solved)])), 0);
    assert_eq!(code(&run(&["verify", "--u", s(&f.u), "--Y", s(&f.y), "--plan", s(&solved)])), 0);

    let report: Value = serde_json::from_str(&fs::read_to_string(&plan).unwrap()).unwrap();
    let mut psi: Vec<f64> = serde_json::from_value(report["psi"].clone()).unwrap();
    psi[2] += 0.1;
    let bumped = write(dir, "psi.json", &json!(psi));
    let o = run(&["verify", "--u", s(&f.u), "--Y", s(&f.y), "--plan", s(&plan), "--psi", s(&bumped)]);
    assert_eq!(code(&o), 4);
    assert!(stdout_json(&o)["max_gap"].as_f64().unwrap() >= 0.1 - 1e-8);
}

#[test]
fn verify_rejects_shuffled_plan() {
    let vals = [2.2, -0.5, 3.1, 0.9];
    let f = files(abstract_map(&vals, &[0.25; 4]), line_measure(&[0.0, 1.0, 2.0, 3.0]));
    let dir = f.u.parent().unwrap();
    let plan = dir.join("f.json");
    assert_eq!(code(&run(&["factorize", "--u", s(&f.u), "--Y", s(&f.y), "--out", s(&plan)])), 0);
    let mut report: Value = serde_json::from_str(&fs::read_to_string(&plan).unwrap()).unwrap();
    report["triplets"] = json!([
        {"i": 0, "j": 0, "mass": 0.25}, {"i": 1, "j": 1, "mass": 0.25},
        {"i": 2, "j": 2, "mass": 0.25}, {"i": 3, "j": 3, "mass": 0.25}
    ]);
    let shuffled = write(dir, "shuffled.json", &report);
    let o = run(&["verify", "--u", s(&f.u), "--Y", s(&f.y), "--plan", s(&shuffled), "--format", "text"]);
    assert!(matches!(code(&o), 4 | 5));
    assert!(String::from_utf8_lossy(&o.stdout).contains("max Fenchel gap"));

    report["triplets"] = json!([{"i": 0, "j": 0, "mass": 1.0}]);
    let broken = write(dir, "broken.json", &report);
    assert_eq!(code(&run(&["verify", "--u", s(&f.u), "--Y", s(&f.y), "--plan", s(&broken)])), 2);
}

#[test]
fn rearrange_m_to_1() {
    let dir = tempfile::tempdir().unwrap();
    let u = write(dir.path(), "u.json", &abstract_map(&[1.0, 1.0, 2.0, 3.0], &[0.25; 4]));

    let o = run(&["rearrange", "--u", s(&u), "--m", "1"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["map"]["values"], json!([[1.0], [2.0], [3.0]]));

    let o = run(&["rearrange", "--u", s(&u), "--m", "2"]);
    let v = stdout_json(&o);
    assert_eq!(v["report"]["almost_m_to_1"], json!(2));

    let heavy = write(dir.path(), "heavy.json", &json!([[1.0]]));
    let o = run(&["rearrange", "--u", s(&u), "--m", "3", "--heavy", s(&heavy)]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["report"]["almost_m_to_1"], json!(3));
    let heavy_atom = v["report"]["atoms"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["heavy"] == json!(true))
        .unwrap()
        .clone();
    assert!((heavy_atom["mass"].as_f64().unwrap() - 0.5).abs() < 1e-15);

    // output of rearrange feeds back in through its `map` wrapper
    let out = dir.path().join("r.json");
    assert_eq!(code(&run(&["rearrange", "--u", s(&u), "--m", "2", "--out", s(&out)])), 0);
    assert_eq!(code(&run(&["rearrange", "--u", s(&out), "--m", "1"])), 0);

    let unknown = write(dir.path(), "unknown.json", &json!([[9.0]]));
    assert_eq!(code(&run(&["rearrange", "--u", s(&u), "--m", "2", "--heavy", s(&unknown)])), 2);
    assert_eq!(code(&run(&["rearrange", "--u", s(&u), "--m", "0"])), 2);
}

#[test]
fn rearrange_onto_target() {
    let f = files(abstract_map(&[0.0, 1.5], &[1.0 / 3.0, 2.0 / 3.0]), line_measure(&[0.0, 1.0, 2.0]));
    let o = run(&["rearrange", "--u", s(&f.u), "--Y", s(&f.y)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["map"]["values"], json!([[0.0], [1.5], [1.5]]));

    let f = files(abstract_map(&[0.0, 1.0], &[0.5, 0.5]), line_measure(&[0.0, 1.0, 2.0]));
    assert_eq!(code(&run(&["rearrange", "--u", s(&f.u), "--Y", s(&f.y)])), 2);
    let o = run(&["rearrange", "--u", s(&f.u), "--Y", s(&f.y), "--refine-split", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("label,weight,value_1"));
}

#[test]
fn tolerance_from_environment() {
    let f = files(abstract_map(&[1.0, 0.0], &[0.5, 0.5]), line_measure(&[0.0, 1.0]));
    let o = bin()
        .args(["factorize", "--u", s(&f.u), "--Y", s(&f.y)])
        .env("POLARFACT_TOL", "1e-3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["tol"], json!(0.001));
    let o = bin()
        .args(["factorize", "--u", s(&f.u), "--Y", s(&f.y), "--tol", "1e-6"])
        .env("POLARFACT_TOL", "1e-3")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&o)["tol"], json!(1e-6));
    let o = bin()
        .args(["solve", "--u", s(&f.u), "--Y", s(&f.y)])
        .env("POLARFACT_TOL", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn csv_measure_input_and_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.csv");
    fs::write(&y, "label,coord_1,weight\na,0,0.5\nb,1,0.5\n").unwrap();
    let u = write(dir.path(), "u.json", &abstract_map(&[1.0, 0.0], &[0.5, 0.5]));
    let o = run(&["solve", "--u", s(&u), "--Y", s(&y), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout), "i,j,mass\n0,1,0.5\n1,0,0.5\n");
}
