use std::process::Command;

use nhslice::driver::{RunConfig, BUDGET_FILE, MANIFEST_FILE, SNAPSHOT_FILE};

fn nhslice() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nhslice"));
    cmd.env("RUST_LOG", "warn").env_remove("SLICE_OUTPUT_DIR");
    cmd
}

#[test]
fn print_config_applies_overrides() {
    let out = nhslice()
        .args(["print-config", "--ne", "6", "--mode", "lagrangian", "--case", "rest", "--dt", "10"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let cfg = RunConfig::from_toml(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.ne, 6);
    assert_eq!(cfg.dt, 10.0);
    assert_eq!(cfg.n, RunConfig::default().n);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "ne = 3\nn = 9\n").unwrap();
    let out = nhslice()
        .args(["print-config", "-c", path.to_str().unwrap(), "--n", "11"])
        .output()
        .unwrap();
    let cfg = RunConfig::from_toml(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!((cfg.ne, cfg.n), (3, 11));
}

#[test]
fn invalid_config_is_rejected() {
    let out = nhslice().args(["print-config", "--dt", "7", "--run-length", "100"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("whole number"));
}

#[test]
fn validate_operators_passes() {
    let out = nhslice().args(["validate-operators", "--trials", "50"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 9);
}

#[test]
fn run_writes_outputs_to_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out");
    let out = nhslice()
        .env("SLICE_OUTPUT_DIR", &target)
        .args(["run", "--ne", "3", "--n", "8", "--length", "3e5", "--dt", "20", "--run-length", "200", "--spinup", "100"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [BUDGET_FILE, SNAPSHOT_FILE, MANIFEST_FILE] {
        assert!(target.join(f).exists(), "{f}");
    }
}

#[test]
fn sweep_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = nhslice()
        .args(["sweep", "--ne", "3", "--n", "8", "--length", "3e5", "--dt", "20", "--run-length", "200", "--spinup", "0"])
        .args(["--points", "3", "--output-dir", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("orders:"));
}
