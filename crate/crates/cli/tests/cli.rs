use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_groupoidal"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = args.to_vec();
    a.push("--json");
    let o = run(&a);
    let v = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)));
    (code(&o), v)
}

fn example(name: &str) -> Value {
    let o = run(&["example", name]);
    assert_eq!(code(&o), 0);
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write(v: &Value) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(serde_json::to_string(v).unwrap().as_bytes()).unwrap();
    f
}

fn path(f: &tempfile::NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

fn failed_checks(report: &Value) -> Vec<String> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["failures"].as_u64().unwrap() > 0)
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn validate_groupoid_documents() {
    let z2 = example("z2");
    let f = write(&z2);
    let (c, r) = json(&["validate", path(&f)]);
    assert_eq!(c, 0);
    assert_eq!(r["status"], "pass");

    let mut broken = z2.clone();
    broken["inv"][2] = 2.into();
    broken["inv"][3] = 3.into();
    let f = write(&broken);
    let (c, r) = json(&["validate", path(&f)]);
    assert_eq!(c, 1);
    assert!(failed_checks(&r).contains(&"groupoid.iv".to_string()), "{r}");

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    bad.write_all(b"{\"objects\": 2, \"arrows\": [").unwrap();
    assert_eq!(code(&run(&["validate", path(&bad)])), 2);
    assert_eq!(code(&run(&["validate", "/definitely/not/here.json"])), 2);
}

#[test]
fn validate_bundles_and_automorphisms() {
    let tp = example("three-point");
    assert_eq!(code(&run(&["validate", path(&write(&tp))])), 0);

    let g = example("gauge-element");
    let (c, r) = json(&["validate", path(&write(&g))]);
    assert_eq!(c, 0, "{r}");
    assert_eq!(r["data"]["vertical"], true);

    let mut not_bijective = g.clone();
    not_bijective["automorphism"]["f"] = serde_json::json!([0, 0, 2]);
    assert_eq!(code(&run(&["validate", path(&write(&not_bijective))])), 1);

    // β₀₁(b) replaced by a non-bisection: both values are (r,0).
    let mut broken = tp.clone();
    let entry = broken["cocycle"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|e| e["i"] == 0 && e["j"] == 1)
        .unwrap();
    entry["bisection"] = serde_json::json!([2, 2]);
    let (c, _) = json(&["validate", path(&write(&broken))]);
    assert_ne!(c, 0);
}

#[test]
fn identity_suite_and_cap() {
    for name in ["z2", "pair3"] {
        let (c, r) = json(&["check-identities", path(&write(&example(name)))]);
        assert_eq!(c, 0, "{name}: {:?}", failed_checks(&r));
        assert_eq!(r["data"]["id_reducible"], true);
    }
    let p4 = write(&example("pair4"));
    let (c, r) = json(&["check-identities", path(&p4), "--cap", "1"]);
    assert_eq!(c, 3);
    assert_eq!(r["status"], "cap-exceeded");
}

#[test]
fn bundle_reports() {
    let f = write(&example("three-point"));
    let (c, r) = json(&["bundle", path(&f), "--report", "counts"]);
    assert_eq!(c, 0);
    assert_eq!(r["data"]["counts"], "12/6/12/36/8");
    for which in ["axioms", "atiyah", "trident", "gauge"] {
        let (c, r) = json(&["bundle", path(&f), "--report", which]);
        assert_eq!(c, 0, "{which}: {:?}", failed_checks(&r));
    }
    let (_, r) = json(&["bundle", path(&f), "--report", "gauge"]);
    assert_eq!((r["data"]["gauge"].as_u64(), r["data"]["automorphisms"].as_u64()), (Some(8), Some(48)));
    assert_eq!(code(&run(&["bundle", path(&f), "--report", "nonsense"])), 2);
}

fn endpoint(r: &Value) -> Vec<Vec<f64>> {
    serde_json::from_value(r["data"]["transport"]["endpoint"].clone()).unwrap()
}

#[test]
fn transport_closed_form_and_order() {
    let (c, r) = json(&["transport", "so2-single", "--connection", "first-generator", "--step", "1e-3"]);
    assert_eq!(c, 0, "{r}");
    let e = endpoint(&r);
    let (cos, sin) = (1f64.cos(), 1f64.sin());
    let want = [[cos, sin], [-sin, cos]];
    for (row, wrow) in e.iter().zip(want) {
        for (x, w) in row.iter().zip(wrow) {
            assert!((x - w).abs() < 1e-8);
        }
    }
    let order = r["data"]["transport"]["order"].as_f64().unwrap();
    assert!((order - 4.0).abs() < 0.3, "{order}");

    let (c, r) = json(&["transport", "so3-single", "--connection", "zero"]);
    assert_eq!(c, 0);
    let e = endpoint(&r);
    for (i, row) in e.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            assert_eq!(*x, if i == j { 1.0 } else { 0.0 });
        }
    }

    // Transitions depend on the moment, so zero does not glue across charts.
    let (c, r) = json(&["transport", "so3-three-chart", "--connection", "zero"]);
    assert_eq!(c, 1);
    assert_eq!(failed_checks(&r), vec!["connection.gluing".to_string()]);
}

#[test]
fn transport_errors() {
    let off = r#"{"kind":"line","from":[0,0],"to":[9,0]}"#;
    assert_eq!(code(&run(&["transport", "so2-two-chart", "--path", off])), 2);
    assert_eq!(code(&run(&["transport", "no-such-scenario"])), 2);
    let huge = r#"{"kind":"linear","coeffs":[[[1e300],[0]]]}"#;
    let (c, r) = json(&["transport", "so2-single", "--connection", huge]);
    assert_eq!(c, 4, "{r}");
    assert_eq!(r["status"], "numeric-failure");
}

#[test]
fn transport_from_scenario_file_with_custom_start() {
    let s = write(&example("so3-three-chart"));
    let start = r#"{"a":[[1,0,0],[0,0,-1],[0,1,0]],"m":[0.2,0.1,-0.3]}"#;
    let route = r#"{"kind":"polyline","points":[[-1.5,-1],[0.5,1.5],[2.5,0.5]]}"#;
    let (c, r) = json(&["transport", path(&s), "--start", start, "--path", route, "--step", "0.01"]);
    assert_eq!(c, 0, "{:?}", failed_checks(&r));
    assert_eq!(r["data"]["transport"]["moment"], serde_json::json!([0.2, 0.1, -0.3]));
    let bad_start = r#"{"a":[[2,0,0],[0,1,0],[0,0,1]],"m":[0,0,0]}"#;
    assert_eq!(code(&run(&["transport", "so3-single", "--start", bad_start])), 2);
}

fn without_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings_ms");
    v
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let args = ["transport", "so2-two-chart", "--seed", "7", "--step", "0.01"];
    let (_, a) = json(&args);
    let (_, b) = json(&args);
    assert_eq!(without_timings(a.clone()), without_timings(b));
    let text = serde_json::to_string(&a).unwrap();
    assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), a);

    let one_thread = bin().args(args).arg("--json").env("GROUPOIDAL_THREADS", "1").output().unwrap();
    let c: Value = serde_json::from_slice(&one_thread.stdout).unwrap();
    assert_eq!(without_timings(a), without_timings(c));
}

#[test]
fn scenario_validation_and_overrides() {
    let mut doc = example("so2-two-chart");
    let (c, r) = json(&["validate", path(&write(&doc)), "--tol", "1e-9"]);
    assert_eq!(c, 0);
    assert_eq!(r["tolerances"]["tol"], 1e-9);
    // Drop the transitions: the overlap then has no clutching data.
    doc["cocycle"] = serde_json::json!([]);
    doc["trivializers"] = Value::Null;
    assert_eq!(code(&run(&["validate", path(&write(&doc))])), 2);
}
