use std::fs;
use std::process::Command;

fn esm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_esm"))
}

#[test]
fn run_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = esm()
        .args(["run", "--n", "16", "--matcher", "interleaved", "--seed", "3", "--alpha", "1"])
        .args(["--max-t", "3000", "--warmup-t", "1000", "--sample-every", "7", "--c-window", "2", "--record-events"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["n"], 16);
    assert_eq!(manifest["config"]["sample_every"], 7);
    assert_eq!(manifest["config"]["c_window"], 2.0);
    assert_eq!(manifest["config"]["mode"], "two-sided");
    let replay = esm().arg("replay").arg(&out).output().unwrap();
    assert!(replay.status.success(), "{}", String::from_utf8_lossy(&replay.stdout));
}

#[test]
fn run_from_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "n = 10\nmatcher = \"one-sided\"\nseed = 4\nmax_t = 500\nwarmup_t = 100\n").unwrap();
    let out = dir.path().join("out");
    let status = esm().arg("run").arg("--config").arg(&cfg).args(["--seed", "9"]).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 9);
    assert_eq!(manifest["config"]["mode"], "one-sided-b");
    assert!(fs::read_to_string(out.join("timeseries.csv")).unwrap().starts_with("t,blocking_pairs,"));
}

#[test]
fn incompatible_matcher_and_mode_fail() {
    let dir = tempfile::tempdir().unwrap();
    let output = esm()
        .args(["run", "--n", "8", "--matcher", "one-sided", "--mode", "two-sided", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("one-sided"));
}

#[test]
fn sweep_writes_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.json");
    let status = esm()
        .args(["sweep", "--sizes", "8,12,16", "--matchers", "one-sided,interleaved", "--seeds", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 12);
    assert_eq!(summary["groups"].as_array().unwrap().len(), 6);
    assert_eq!(summary["fits"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_runs_selected_criteria() {
    let output = esm().args(["verify", "--only", "2,4"]).output().unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
}
