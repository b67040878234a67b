use std::process::{Command, Output};

const T11A: &str = r#"{"id": "t11a", "n": 3, "m": 1, "b": {"2": 1, "3": -0.5}}"#;

fn lienard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lienard")).args(args).output().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(lienard(&["classify", "--system", T11A]).status.code(), Some(0));
    assert_eq!(lienard(&["classify", "--bogus"]).status.code(), Some(1));
    assert_eq!(lienard(&["classify", "--system", "{\"n\": 3"]).status.code(), Some(1));
    // even n breaks the standing assumptions
    assert_eq!(lienard(&["validate", "--system", r#"{"n": 2, "m": 1}"#]).status.code(), Some(2));
    let out = lienard(&["balance", "--system", r#"{"n": 1, "m": 5, "a": {"1": 1, "4": 0.2}}"#, "--coefficient", "a3", "--bracket", "-1", "3"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_row_and_out_file() {
    let out = lienard(&["verify", "--system", T11A, "--max-iter", "3000"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# config: {"));
    let mut rows = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rows.headers().unwrap().clone();
    let row = rows.records().next().unwrap().unwrap();
    let col = |name: &str| row[header.iter().position(|h| h == name).unwrap()].to_string();
    assert_eq!(col("case"), "T1.1a");
    assert_eq!(col("predicted_dim"), "0.5");
    let est: f64 = col("dim_gap_law").parse().unwrap();
    assert!((est - 0.5).abs() < 0.05);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("classify.json");
    let out = lienard(&["classify", "--system", T11A, "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(body["config"]["command"], "classify");
    assert!(String::from_utf8(out.stdout).unwrap().contains("T1.1a"));
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let cfg = format!(r#"{{"command": "classify", "system": {T11A}, "format": "json"}}"#);
    std::fs::write(&path, cfg).unwrap();
    let from_file = lienard(&["classify", "--config", path.to_str().unwrap()]);
    let inline = lienard(&["classify", "--system", T11A]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, inline.stdout);
}
