use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn berbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_berbench")).args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn calibrate_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let out = berbench(&["calibrate", "--family", "GvG", "--d", "2", "--range", "0.1,0.3", "--seed", "4", "--out", path.to_str().unwrap()]);
    ok(&out);
    let table: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let entries = table["entries"].as_array().unwrap();
    assert!(entries.len() >= 20);
    let first = entries[0]["ber"].as_f64().unwrap();
    let last = entries[entries.len() - 1]["ber"].as_f64().unwrap();
    assert!(first <= 0.1 && last >= 0.3, "{first} {last}");
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let config = serde_json::json!({
        "family": "GvG",
        "dims": [2],
        "n_per_class": [40],
        "runs": 30,
        "master_seed": 5,
        "estimators": ["knn_H", "knn_L", "ghp_L", "nb"],
        "output_dir": dir.join("out"),
    });
    let path = dir.join("config.json");
    fs::write(&path, config.to_string()).unwrap();
    path
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let stdout = ok(&berbench(&["run", "--config", config.to_str().unwrap(), "--workers", "1"]));
    assert!(stdout.contains("completed 30, failed 0"), "{stdout}");
    // a second run resumes everything
    let stdout = ok(&berbench(&["run", "--config", config.to_str().unwrap()]));
    assert!(stdout.contains("resumed 30, completed 0"), "{stdout}");

    let out_dir = dir.path().join("out");
    let md = ok(&berbench(&["report", "--records", out_dir.to_str().unwrap()]));
    assert!(md.starts_with("| Family | d | n | Best |"));
    assert_eq!(md.lines().count(), 3);

    let csv = ok(&berbench(&[
        "report",
        "--records",
        out_dir.to_str().unwrap(),
        "--format",
        "csv",
        "--estimators",
        "knn_H,nb",
        "--plots",
        "ghp_L",
    ]));
    assert_eq!(csv.lines().count(), 3);
    assert!(out_dir.join("plots").join("ghp_L.svg").exists());

    let by_d = ok(&berbench(&["report", "--records", out_dir.to_str().unwrap(), "--group-by", "d", "--format", "full"]));
    assert_eq!(by_d.lines().count(), 2 + 4);
}

#[test]
fn errors_exit_nonzero() {
    assert!(!berbench(&["calibrate", "--family", "XvY", "--d", "2"]).status.success());
    assert!(!berbench(&["run", "--config", "/nonexistent/config.json"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"family": "GvG", "dims": [2], "n_per_class": [10], "runs": 0, "master_seed": 1, "output_dir": "x"}"#).unwrap();
    assert!(!berbench(&["run", "--config", bad.to_str().unwrap()]).status.success());
}
