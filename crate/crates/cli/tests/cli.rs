use std::path::Path;
use std::process::{Command, Output};

fn powergeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powergeom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn analyze_line_lr_reports_determinant() {
    let v = json(&powergeom(&["analyze-line", "--r", "0.08", "--l", "0.24", "--omega", "pi"]));
    assert_eq!(v["kind"], "lr");
    let det = v["verdict"]["det_g"].as_f64().unwrap();
    assert!((det - -207.7817).abs() < 1e-3, "{det}");
    assert_eq!(v["verdict"]["globally_reliable"], true);
}

#[test]
fn analyze_line_lcr_reports_closed_form_discrepancy() {
    let v = json(&powergeom(&[
        "analyze-line", "--r", "0.05", "--l", "0.2", "--c", "0.1", "--omega", "1",
    ]));
    assert_eq!(v["kind"], "lcr");
    assert_eq!(v["verdict"]["metric"]["coordinate_order"], serde_json::json!(["L", "C", "r"]));
    let d = v["closed_form_discrepancies"].as_array().unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0]["entry"], "g_LL");
}

#[test]
fn origin_is_an_input_error() {
    let out = powergeom(&["analyze-line", "--r", "0", "--l", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["bogus"],
        vec!["analyze-line", "--r", "0.1"],
        vec!["analyze-line", "--r", "x", "--l", "0.1"],
        vec!["analyze-line", "--r", "0.1", "--l", "0.1", "--omega", "-1"],
        vec!["sweep", "--r", "0.1", "--l", "0:1", "--c", "0.1:1:3"],
        vec!["verify-paper", "--which", "table9"],
    ] {
        let out = powergeom(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let out = powergeom(&[
        "sweep", "--r", "0.1", "--l", "0:1:50", "--c", "0.02:1:50", "--omega", "1",
        "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("L,C,"), "{header}");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2500);
    let width = header.split(',').count();
    assert!(rows.iter().all(|r| r.split(',').count() == width));
}

#[test]
fn sweep_output_is_deterministic() {
    let args = ["sweep", "--r", "0.05", "--l", "0.01:0.5:7", "--c", "0.05:1:9"];
    assert_eq!(powergeom(&args).stdout, powergeom(&args).stdout);
}

#[test]
fn verify_table1_flags_the_erratum() {
    let out = powergeom(&["verify-paper", "--which", "table1", "--format", "json"]);
    let v = json(&out);
    let sections = v["sections"].as_array().unwrap();
    assert_eq!(sections.len(), 1);
    let checks = sections[0]["checks"].as_array().unwrap();
    assert!(checks[0]["note"].as_str().unwrap().contains("erratum"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("omega"));
}

fn write_sample(dir: &Path, kind: &str) -> std::path::PathBuf {
    let path = dir.join(format!("{kind}.toml"));
    let out = powergeom(&["sample-case", "--kind", kind, "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    path
}

#[test]
fn sample_case_round_trips_through_the_network_command() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["lr", "lcr"] {
        let path = write_sample(dir.path(), kind);
        let v = json(&powergeom(&["analyze-network", path.to_str().unwrap()]));
        assert_eq!(v["lines"].as_array().unwrap().len(), 7);
        assert_eq!(v["buses"].as_array().unwrap().len(), 5);
        let text = powergeom(&["analyze-network", path.to_str().unwrap(), "--format", "text"]);
        assert!(stdout(&text).contains("Buses"));
    }
}

#[test]
fn malformed_case_file_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "omega = 1.0\n[[buses]]\nid = \"1\"\nv = = 1\n").unwrap();
    let out = powergeom(&["analyze-network", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn zero_capacitance_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_sample(dir.path(), "lcr");
    let text = std::fs::read_to_string(&path).unwrap();
    let broken = text.replacen("c = 0.3", "c = 0.0", 1);
    assert_ne!(broken, text);
    std::fs::write(&path, broken).unwrap();
    let out = powergeom(&["analyze-network", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("C = 0"));
}
