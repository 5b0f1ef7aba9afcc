use std::process::{Command, Output};

fn wvqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wvqkd")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn scan_csv_has_header_and_rows() {
    let out = wvqkd(&["scan", "--alpha", "30", "--eta", "0:0.1:0.05", "--regime", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eta,regime,alpha,gamma,delta,qber,mi,holevo,f_sec"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn single_point_range_gives_one_row() {
    let out = wvqkd(&["qber", "--alpha", "10", "--eta", "0.2:0.2:0.01"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn json_output_parses() {
    let out = wvqkd(&["tolerance", "--alpha", "30", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "tolerance");
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(wvqkd(&["scan", "--eta", "0.4:0.1:0.01"]).status.code(), Some(2));
    assert_eq!(wvqkd(&["scan", "--eta", "0:0.6:0.1"]).status.code(), Some(2));
    assert_eq!(wvqkd(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(wvqkd(&["scan", "--delta", "-1"]).status.code(), Some(2));
    assert_eq!(wvqkd(&["tolerance", "--plot", "--out", "x.csv"]).status.code(), Some(2));
    assert_eq!(wvqkd(&["scan", "--plot"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let out = wvqkd(&["qber", "--eta", "0.1", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn plot_writes_svg_next_to_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let out = wvqkd(&["scan", "--alpha", "20", "--eta", "0:0.3:0.05", "--out", csv.to_str().unwrap(), "--plot"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("eta,"));
    let svg = std::fs::read_to_string(dir.path().join("scan.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"eta": "0:0.2:0.1", "alpha": [5, 10], "format": "json"}"#).unwrap();
    let out = wvqkd(&["qber", "--config", cfg.to_str().unwrap(), "--alpha", "40"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1] == 40.0));
}

#[test]
fn montecarlo_reports_and_is_reproducible() {
    let args = ["montecarlo", "--rounds", "200000", "--seed", "3"];
    let first = wvqkd(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, wvqkd(&args).stdout);
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["validation"]["schema_version"], 1);
    assert!(v["probe"]["agrees_with_exact"].as_bool().unwrap());
}

#[test]
fn montecarlo_low_power_still_succeeds() {
    let out = wvqkd(&["montecarlo", "--rounds", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["validation"]["low_power"], true);
}
