use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn statuses(report: &Value) -> Vec<(String, String)> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["name"].as_str().unwrap().to_string(), c["status"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn list_names_every_bundled_scenario() {
    let o = lcf(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in [
        "ellipsoid-flat-ambient",
        "round-sphere",
        "random-slab-seed-42",
        "lcf-slab",
        "generic-slab-boundary",
        "ellipsoid-8d",
    ] {
        assert!(text.contains(name), "{name} missing from list");
    }
    assert!(text.contains("pointwise-transgression"));
}

#[test]
fn describe_checks_and_unknown_names() {
    let o = lcf(&["describe", "stokes"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Stokes formula"));
    let o = lcf(&["describe", "ellipsoid-flat-ambient"]);
    assert!(o.status.success());
    let cfg: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cfg["schema"], 1);
    let o = lcf(&["describe", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_check_list_succeeds_with_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    std::fs::write(
        &cfg,
        r#"{"schema": 1, "name": "empty", "dim": 4,
            "metric": {"kind": "conformal-flat", "f": "0"}, "checks": []}"#,
    )
    .unwrap();
    let report = dir.path().join("r.json");
    let o = lcf(&["run", cfg.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_report(&report);
    assert_eq!(r["checks"].as_array().unwrap().len(), 0);
    assert_eq!(r["config"]["name"], "empty");
}

#[test]
fn bad_configs_exit_with_two() {
    assert_eq!(lcf(&["run", "/nonexistent/scenario.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("schema.json", r#"{"schema": 2, "name": "x", "dim": 4, "metric": {"kind": "conformal-flat", "f": "0"}}"#),
        ("dim.json", r#"{"schema": 1, "name": "x", "dim": 5, "metric": {"kind": "conformal-flat", "f": "0"}}"#),
        ("parse.json", r#"{"schema": 1, "name": "x", "dim": 4, "metric": {"kind": "conformal-flat", "f": "sin("}}"#),
        (
            "check.json",
            r#"{"schema": 1, "name": "x", "dim": 4, "metric": {"kind": "conformal-flat", "f": "0"}, "checks": ["nope"]}"#,
        ),
    ];
    for (name, body) in cases {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        assert_eq!(lcf(&["run", p.to_str().unwrap()]).status.code(), Some(2), "{name}");
    }
}

#[test]
fn ellipsoid_scenario_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let o = lcf(&[
            "run",
            "bundled:ellipsoid-flat-ambient",
            "--threads",
            "1",
            "--no-timing",
            "--report",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let r = read_report(&a);
    for want in ["t2d", "tetab", "coma", "dnat", "r04d", "boundary-vanishing"] {
        assert!(statuses(&r).contains(&(want.to_string(), "pass".to_string())), "{want}");
    }
    assert!(r["checks"][0]["evidence"]["worst_point"].is_array());
}

#[test]
fn random_slab_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = lcf(&["run", "bundled:random-slab-seed-42", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r = read_report(&report);
    assert_eq!(
        statuses(&r),
        vec![
            ("bianchi".to_string(), "pass".to_string()),
            ("pointwise-transgression".to_string(), "pass".to_string()),
            ("stokes".to_string(), "pass".to_string()),
        ]
    );
    assert!(r["checks"][2]["evidence"]["bulk"].as_f64().unwrap().abs() > 1e-6);
}

#[test]
fn expected_hypothesis_errors_and_strict_mode() {
    let o = lcf(&["run", "bundled:generic-slab-boundary"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("hypothesis violated"));
    let o = lcf(&["run", "bundled:generic-slab-boundary", "--strict"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failing_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("generic.json");
    std::fs::write(
        &cfg,
        r#"{"schema": 1, "name": "generic", "dim": 4, "seed": 42,
            "metric": {"kind": "slab-expr", "random_degree": 2},
            "grids": {"points": 4},
            "checks": ["weyl-vanishing", "obstruction"],
            "tolerances": {"obstruction": 1e-9}}"#,
    )
    .unwrap();
    let report = dir.path().join("r.json");
    let o = lcf(&["run", cfg.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r = read_report(&report);
    assert_eq!(r["checks"][0]["status"], "fail");
    // a generic slab has a nonzero integral, reported with its error bar
    assert!(r["checks"][1]["evidence"]["integral"].as_f64().unwrap().abs() > 0.0);
    assert!(r["checks"][1]["evidence"]["error_estimate"].is_number());
}

#[test]
fn seed_override_changes_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    lcf(&["run", "bundled:lcf-slab", "--no-timing", "--report", a.to_str().unwrap()]);
    lcf(&["run", "bundled:lcf-slab", "--no-timing", "--seed", "8", "--report", b.to_str().unwrap()]);
    let (ra, rb) = (read_report(&a), read_report(&b));
    assert_eq!(rb["seed"], 8);
    assert_ne!(ra["checks"][0]["evidence"], rb["checks"][0]["evidence"]);
    assert_eq!(statuses(&rb), statuses(&ra));
}

#[test]
fn eta_commands() {
    let o = lcf(&["eta", "lens", "3", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("-1/3") && text.contains("convention-calibrated") && text.contains("obstructed"));
    assert_eq!(lcf(&["eta", "lens", "6", "4"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("etas.jsonl");
    let o = lcf(&["eta", "export", "--lens", "3:1", "--lens", "5:1", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let lines: Vec<Value> = std::fs::read_to_string(&out)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[4]["label"], "L(3,1)");
    assert_eq!(lines[4]["provenance"], "cotangent-formula");

    let o = lcf(&["eta", "check", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches("obstructed").count(), 6);

    // two components whose etas cancel
    let pair = dir.path().join("pair.jsonl");
    std::fs::write(
        &pair,
        concat!(
            r#"{"label":"A","kind":"signature","eta_num":-1,"eta_den":3,"provenance":"imported"}"#,
            "\n",
            r#"{"label":"B","kind":"signature","eta_num":1,"eta_den":3,"provenance":"imported"}"#,
            "\n"
        ),
    )
    .unwrap();
    let o = lcf(&["eta", "check", "--sum", pair.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("consistent"));
}
