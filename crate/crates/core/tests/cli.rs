use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_finsleroid"));
    cmd.env_remove("FINSLEROID_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Same keys everywhere, numbers equal to 1e-12 (absolute or relative).
fn assert_matches_golden(actual: &Value, golden: &Value, path: &str) {
    match (actual, golden) {
        (Value::Object(a), Value::Object(g)) => {
            let ka: Vec<_> = a.keys().collect();
            let kg: Vec<_> = g.keys().collect();
            assert_eq!(ka, kg, "keys differ at {path}");
            for (k, v) in a {
                assert_matches_golden(v, &g[k], &format!("{path}.{k}"));
            }
        }
        (Value::Array(a), Value::Array(g)) => {
            assert_eq!(a.len(), g.len(), "length differs at {path}");
            for (i, (x, y)) in a.iter().zip(g).enumerate() {
                assert_matches_golden(x, y, &format!("{path}[{i}]"));
            }
        }
        (Value::Number(a), Value::Number(g)) => {
            let (a, g) = (a.as_f64().unwrap(), g.as_f64().unwrap());
            assert!((a - g).abs() <= 1e-12 * g.abs().max(1.0), "{path}: {a} vs golden {g}");
        }
        _ => assert_eq!(actual, golden, "value differs at {path}"),
    }
}

#[test]
fn eval_matches_golden_at_the_pseudo_euclidean_point() {
    let out = run(&["eval", "--H", "1", "--p", "1", "--y", "2,0.5,0.3,0.4"]);
    let doc = stdout_json(&out);
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/eval_h1_p1.json");
    let golden: Value = serde_json::from_str(&std::fs::read_to_string(golden_path).unwrap()).unwrap();
    assert_matches_golden(&doc, &golden, "$");

    // Independent of the snapshot: F is the Minkowski norm and g = diag(1, -1, -1, -1).
    let f = doc["bundle"]["F"].as_f64().unwrap();
    assert!((f - 3.5f64.sqrt()).abs() < 1e-14);
    for i in 0..4 {
        for j in 0..4 {
            let expected = match (i, j) {
                (0, 0) => 1.0,
                (i, j) if i == j => -1.0,
                _ => 0.0,
            };
            assert!((doc["g"][i][j].as_f64().unwrap() - expected).abs() < 1e-12);
        }
    }
    assert!((doc["detG_numeric"].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn eval_near_the_axis() {
    let doc = stdout_json(&run(&["eval", "--H", "1", "--p", "1", "--y", "2,1,0,0.0001"]));
    assert!((doc["bundle"]["F"].as_f64().unwrap() - 3.0f64.sqrt()).abs() < 1e-8);
    assert!((doc["detG_closed"].as_f64().unwrap() + 1.0).abs() < 1e-10);
}

#[test]
fn eval_determinants_agree() {
    let doc = stdout_json(&run(&["eval", "--H", "1.25", "--p", "0.8", "--y", "2,0.2,0.1,0.5"]));
    let closed = doc["detG_closed"].as_f64().unwrap();
    let numeric = doc["detG_numeric"].as_f64().unwrap();
    assert!((closed - numeric).abs() < 1e-9 * closed.abs());
    assert!(doc["h_angle_form"].is_array());
}

#[test]
fn eval_schema_is_stable() {
    let keys = |doc: &Value| doc.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    let a = stdout_json(&run(&["eval", "--H", "1", "--p", "1", "--y", "2,0.5,0.3,0.4"]));
    let b = stdout_json(&run(&["eval", "--H", "2", "--p", "0.5", "--y", "3,0.02,0.01,0.2"]));
    assert_eq!(keys(&a), keys(&b));
    assert_eq!(keys(&a["bundle"]), keys(&b["bundle"]));
}

#[test]
fn domain_errors_exit_two_with_bounds() {
    for y in ["1,0,0,0", "2,0.3,0.2,0.6", "-1,0,0,0.5"] {
        let out = run(&["eval", "--H", "1.25", "--p", "0.8", "--y", y]);
        assert_eq!(out.status.code(), Some(2), "y = {y}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("eta_min = 1.047"), "{err}");
    }
    let out = run(&["eval", "--H", "1.25", "--p", "0.8", "--y", "1,0,0,0"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("OutsideAxialRegion"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["eval", "--H", "0.5", "--p", "1", "--y", "1,0,0,0"][..],
        &["eval", "--H", "1", "--p", "1.5", "--y", "1,0,0,0"],
        &["eval", "--H", "1", "--p", "1", "--y", "1,0,0"],
        &["eval", "--H", "1", "--p", "1", "--y", "1,x,0,0"],
        &["eval", "--p", "1", "--y", "1,0,0,0"],
        &["eval", "--H", "1", "--p", "1", "--y", "2,0,0,1", "--format", "csv"],
        &["report", "bogus"],
        &["eval", "--H", "1", "--p", "1", "--y", "2,0,0,1", "--tetrad", "/nonexistent/file.json"],
        &["eval", "--H", "1", "--p", "1", "--y", "2,0,0,1", "--tetrad", "{\"H\": 1, \"extra\": 0}"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = bin()
        .args(["report", "curvature", "--H", "1.5", "--p", "0.9", "--samples", "1"])
        .env("FINSLEROID_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero_and_documents_columns() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("w_perp,w3,F,detG,status"));
    assert!(text.contains("FINSLEROID_SEED"));
}

#[test]
fn tetrad_document_inline_and_from_file() {
    let doc = r#"{"H": 1.25, "p": 0.8, "tetrad": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#;
    let inline = run(&["eval", "--tetrad", doc, "--y", "2,0.2,0.1,0.5"]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bg.json");
    std::fs::write(&path, doc).unwrap();
    let file = run(&["eval", "--tetrad", path.to_str().unwrap(), "--y", "2,0.2,0.1,0.5"]);
    let flags = run(&["eval", "--H", "1.25", "--p", "0.8", "--y", "2,0.2,0.1,0.5"]);
    assert_eq!(stdout_json(&inline), stdout_json(&flags));
    assert_eq!(inline.stdout, file.stdout);

    // Flags take precedence over the document.
    let overridden = stdout_json(&run(&["eval", "--tetrad", doc, "--H", "1", "--p", "1", "--y", "2,0.5,0.3,0.4"]));
    assert_eq!(overridden["H"].as_f64(), Some(1.0));

    let broken = r#"{"tetrad": [[2,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#;
    let out = run(&["eval", "--H", "1", "--p", "1", "--tetrad", broken, "--y", "2,0,0,1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reports_are_deterministic() {
    for args in [
        &["report", "curvature", "--H", "1.5", "--p", "0.9", "--samples", "6", "--seed", "11"][..],
        &["report", "curvature", "--H", "1.5", "--p", "0.9", "--samples", "6", "--format", "csv"],
        &["report", "scan", "--H", "1.25", "--p", "0.8", "--samples", "7", "--format", "csv"],
        &["report", "reduction", "--Hgrid", "1.1,2", "--samples", "20"],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_environment_overrides_flag() {
    let args = ["report", "curvature", "--H", "1.5", "--p", "0.9", "--samples", "3"];
    let with_env = bin().args(args).arg("--seed").arg("1").env("FINSLEROID_SEED", "99").output().unwrap();
    let with_flag = run(&[&args[..], &["--seed", "99"]].concat());
    let other = run(&[&args[..], &["--seed", "1"]].concat());
    assert_eq!(with_env.stdout, with_flag.stdout);
    assert_ne!(with_env.stdout, other.stdout);
}

#[test]
fn curvature_report_summary() {
    let out = run(&["report", "curvature", "--H", "1.5", "--p", "0.9", "--samples", "20"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["samples"].as_array().unwrap().len(), 20);
    assert_eq!(doc["pass"], Value::Bool(true));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("max|K+H^2| = ") && err.contains("< 1e-3"), "{err}");
}

#[test]
fn domain_report_flags_empty_domains() {
    let doc = stdout_json(&run(&["report", "domain", "--H", "1.25", "--p", "0.8"]));
    assert!((doc["rows"][0]["eta_min"].as_f64().unwrap() - 1.0476).abs() < 1e-4);

    let out = run(&["report", "domain", "--Hgrid", "1,1.25", "--pgrid", "0.8,1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "H,p,eta_min,r_min,r_sup,status");
    assert!(lines[1].ends_with(",,,,EmptyDomain"), "{}", lines[1]);
    assert_eq!(lines.len(), 5);
}

#[test]
fn reduction_report_passes() {
    let doc = stdout_json(&run(&["report", "reduction", "--Hgrid", "1.1,1.25,2"]));
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r["pass"] == Value::Bool(true)));
    assert_eq!(doc["tolerance"].as_f64(), Some(1e-10));
}

#[test]
fn scan_csv_round_trips_floats_and_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = run(&[
        "report", "scan", "--H", "1.5", "--p", "0.9", "--samples", "5", "--format", "csv", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("w_perp,w3,F,detG,status"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 25);
    for row in &rows {
        let w_perp: f64 = row[0].parse().unwrap();
        // 17 significant digits: 1 + 16 after the point.
        assert_eq!(row[0].split('e').next().unwrap().len(), 18);
        assert!(w_perp > 0.0 && w_perp < 1.0);
        if row[4] == "ok" {
            row[2].parse::<f64>().unwrap();
            row[3].parse::<f64>().unwrap();
        } else {
            assert!(row[2].is_empty() && row[3].is_empty());
        }
    }
    assert!(rows.iter().any(|r| r[4] == "ok"));
    assert!(rows.iter().any(|r| r[4] == "OutsideAxialRegion"));
}
