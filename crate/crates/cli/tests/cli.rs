use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use roal_core::catalog::{self, Verdict};
use roal_core::matcore::{RealMatrix, ToleranceConfig};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn roal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roal"))
        .args(args)
        .env_remove("ROAL_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn spin_file_closes_to_unital_jordan_algebra() {
    let o = roal(&["check-algebra", path(&data("spin2.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("dimension            3"), "{out}");
    assert!(out.contains("jordan closed        true"));
    assert!(out.contains("identity             [1.000000, 0.000000] [0.000000, 1.000000]"));
}

#[test]
fn corner_is_valid_without_identity() {
    let o = roal(&["check-algebra", path(&data("e12.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("identity             none"));
    assert!(out.contains("diagonal dimension   0"));
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(roal(&["check-algebra", path(&bad)]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(roal(&["check-algebra", path(&missing)]).status.code(), Some(2));
    let o = roal(&["catalog", "run", "expoly", "--tol-psd", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn algebra_report_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = roal(&["check-algebra", path(&data("spin2.json")), "--json", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["dimension"], 3);
    assert_eq!(v["flags"]["unital"], true);
    let id: RealMatrix = serde_json::from_value(v["identity"].clone()).unwrap();
    assert!(id.max_abs_diff(&RealMatrix::identity(2)) < 1e-12);
}

#[test]
fn transpose_map_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map.json");
    let o = roal(&[
        "check-map",
        path(&data("m2.json")),
        path(&data("transpose.json")),
        "--json",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("positive             true"), "{text}");
    assert!(text.contains("cp (Choi)            false"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["flags"]["selfadjoint"], true);
    assert_eq!(v["flags"]["levels"][1]["positive"], false);
    let n1 = v["norms"][0]["value"].as_f64().unwrap();
    let n2 = v["norms"][1]["value"].as_f64().unwrap();
    assert!((n1 - 1.0).abs() <= 1e-4 && n2 >= 2.0 - 1e-4);
}

#[test]
fn identity_map_is_completely_positive() {
    let o = roal(&[
        "check-map",
        path(&data("m2.json")),
        path(&data("identity.json")),
        "--levels",
        "1,2,3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("cp (Choi)            true"));
    for k in 1..=3 {
        assert!(text.contains(&format!("norm level {k}: 1.000000000")), "{text}");
    }
}

#[test]
fn incompatible_dimensions_exit_1() {
    let o = roal(&["check-map", path(&data("m2.json")), path(&data("into_m3.json"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn catalog_list_is_sorted() {
    let o = roal(&["catalog", "list"]);
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    let expected: Vec<String> = catalog::list().iter().map(|s| s.name.to_string()).collect();
    assert_eq!(names, expected);
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn catalog_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("expoly.json");
    let o = roal(&["catalog", "run", "expoly", "--json", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[X + X* has dimension 2]"));
    let text = std::fs::read_to_string(&out).unwrap();
    let parsed: Verdict = serde_json::from_str(&text).unwrap();
    let direct = catalog::run("expoly", 0, &ToleranceConfig::default()).unwrap();
    assert_eq!(parsed, direct);
    assert_eq!(serde_json::to_string_pretty(&parsed).unwrap() + "\n", text);
}

#[test]
fn seed_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = Command::new(env!("CARGO_BIN_EXE_roal"))
        .args(["catalog", "run", "minus3_functional", "--json", path(&out)])
        .env("ROAL_SEED", "17")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let parsed: Verdict = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(parsed.seed, 17);
    let o = Command::new(env!("CARGO_BIN_EXE_roal"))
        .args([
            "catalog",
            "run",
            "minus3_functional",
            "--seed",
            "3",
            "--json",
            path(&out),
        ])
        .env("ROAL_SEED", "17")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let parsed: Verdict = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(parsed.seed, 3);
}

#[test]
fn unknown_scenario_exits_3() {
    let o = roal(&["catalog", "run", "bogus"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn transform_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = roal(&[
        "transform",
        path(&data("m2.json")),
        "--element",
        "0",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let w: RealMatrix = serde_json::from_value(v["output"].clone()).unwrap();
    // E11(1 + E11)⁻¹ = E11/2
    assert!(w.max_abs_diff(&RealMatrix::unit(2, 0, 0).scale(0.5)) < 1e-12);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));

    let o = roal(&[
        "transform",
        path(&data("m2.json")),
        "--matrix",
        r#"{"dim": 2, "entries": [0.5, 0.0, 0.0, 0.2]}"#,
        "--inverse",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let x: RealMatrix = serde_json::from_value(v["output"].clone()).unwrap();
    assert!(x.max_abs_diff(&RealMatrix::diag(&[1.0, 0.25])) < 1e-12);
}

#[test]
fn transform_rejects_elements_outside_the_cone() {
    let o = roal(&[
        "transform",
        path(&data("m2.json")),
        "--matrix",
        r#"{"dim": 2, "entries": [-1.0, 0.0, 0.0, 1.0]}"#,
    ]);
    assert_eq!(o.status.code(), Some(1));
}
