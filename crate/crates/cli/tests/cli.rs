use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alphagauge")).args(args).output().expect("binary runs")
}

fn small() -> Vec<&'static str> {
    vec!["--nm", "80", "--nkeep", "6", "--nc", "16"]
}

#[test]
fn lists_every_preset() {
    let out = run(&["list-presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 20);
    assert!(text.lines().any(|l| l.starts_with("fig3-coupling\t")));
}

#[test]
fn spectrum_prints_csv_rows() {
    let mut args = vec!["spectrum", "--delta", "5", "--eta", "0.5", "--levels", "3", "--models", "exact,jc-gauge"];
    args.extend(small());
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sweep_var,sweep_value,model,observable,value,status");
    assert_eq!(lines.len(), 1 + 6);
    assert!(lines[1].starts_with("alpha,1.0,exact,E0,"));
    assert!(lines.iter().any(|l| l.starts_with("alpha,1.0,jc-gauge,E2,")));
}

#[test]
fn json_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let mut args = vec!["fidelity", "--eta", "0.3", "--models", "qrm-flux", "--format", "json", "--out", path.to_str().unwrap()];
    args.extend(small());
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(value["metadata"]["cutoffs"]["nkeep"], 6);
    assert!(value["rows"].as_array().unwrap().iter().any(|r| r["observable"] == "F_G"));
}

#[test]
fn malformed_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ \"name\": 3 }").unwrap();
    let out = run(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert_eq!(run(&["spectrum", "--preset", "no-such-preset"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--nkeep", "1"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.csv");
    let mut args = vec!["matrix-elements", "--out", target.to_str().unwrap()];
    args.extend(small());
    let out = run(&args);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn sweep_without_a_source_is_rejected() {
    assert_eq!(run(&["sweep"]).status.code(), Some(2));
}
