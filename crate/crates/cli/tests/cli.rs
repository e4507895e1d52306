use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_lattice-light");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"
[lattice]
sites = [6, 6, 1]
depths = [3.0, 3.0, 20.0]

[species]
atom = "rb87"

[phase]
kind = "superfluid"
atoms = 40
temperature = 0.02

[grid]
theta_points = 7
phis = [0.0]
"#;

#[test]
fn superfluid_condensate_matches_reference_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig3_superfluid.toml");
    let o = run(&["superfluid", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("superfluid.json"));
    let n0 = doc["result"]["condensate"].as_f64().unwrap();
    assert!((n0 / 2527.0 - 1.0).abs() < 0.02, "N0 = {n0}");
    assert_eq!(doc["provenance"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["phase"]["atoms"].as_f64(), Some(2700.0));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = run(&["map", "--config", cfg.to_str().unwrap(), "--threads", threads], out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let first = std::fs::read(a.join("map.csv")).unwrap();
    // the thread count is part of the embedded config, so compare the data lines
    let strip = |bytes: &[u8]| String::from_utf8(bytes.to_vec()).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&first), strip(&std::fs::read(b.join("map.csv")).unwrap()));

    let c = dir.path().join("c");
    let o = run(&["map", "--config", cfg.to_str().unwrap(), "--threads", "1"], &c);
    assert!(o.status.success());
    assert_eq!(first, std::fs::read(c.join("map.csv")).unwrap());
}

#[test]
fn csv_carries_provenance_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = run(&["superfluid", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("superfluid.csv")).unwrap();
    let mut lines = text.lines();
    let prov: Value = serde_json::from_str(lines.next().unwrap().trim_start_matches("# ")).unwrap();
    assert_eq!(prov["program"], "lattice-light");
    assert_eq!(prov["command"], "superfluid");
    let config: Value = serde_json::from_str(lines.next().unwrap().trim_start_matches("# config ")).unwrap();
    assert_eq!(config["lattice"]["sites"], serde_json::json!([6, 6, 1]));
    assert!(lines.next().unwrap().starts_with("theta,phi,"));
    assert_eq!(lines.count(), 7);
}

#[test]
fn set_overrides_reach_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = run(&["superfluid", "--config", cfg.to_str().unwrap(), "--set", "phase.temperature=0.03", "--tolerance", "1e-3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("superfluid.json"));
    assert_eq!(doc["config"]["phase"]["temperature"].as_f64(), Some(0.03));
    assert_eq!(doc["config"]["quadrature"]["rel_tol"].as_f64(), Some(1e-3));
    assert_eq!(doc["result"]["state"]["temperature"].as_f64(), Some(0.03));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}\n[run]\nthreds = 2\n"));
    let o = run(&["superfluid", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let summary: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["status"], "error");

    let o = run(&["superfluid", "--config", cfg.to_str().unwrap(), "--set", "phase.colour=3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["superfluid"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn depleted_superfluid_is_a_physics_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = run(&["superfluid", "--config", cfg.to_str().unwrap(), "--set", "phase.temperature=0.2"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = run(&["superfluid", "--config", cfg.to_str().unwrap()], &blocker.join("sub"));
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn example_configs_parse() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        // bands is cheap and validates the whole file
        let o = run(&["bands", "--config", path.to_str().unwrap(), "--set", "lattice.sites=[4,4,1]"], dir.path());
        assert!(o.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn thermometry_smoke_reports_repetitions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("smoke_thermometry.toml");
    let o = run(&["thermometry", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("thermometry.json"));
    let rows = doc["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let text = std::fs::read_to_string(dir.path().join("thermometry.csv")).unwrap();
    // one line per temperature and counting mode
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2 * 3);
    for row in rows {
        let include = &row["modes"][0];
        assert_eq!(include["mode"], "include");
        assert!(include["repetitions"].as_u64().unwrap() >= 1);
    }
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["selftest"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("selftest.json"));
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}
