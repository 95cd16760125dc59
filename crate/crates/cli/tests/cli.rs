use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corrimg"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn shipped_configs_validate() {
    for name in [
        "thermal_ff.toml",
        "pdc_ff.toml",
        "thermal_2f.toml",
        "thermal_statistics.toml",
        "pdc_statistics.toml",
    ] {
        let out = bin().args(["validate", "--config"]).arg(config(name)).output().unwrap();
        assert!(out.status.success(), "{name}: {}", stdout(&out));
        assert_eq!(stdout(&out).trim(), "ok");
    }
}

#[test]
fn validate_lists_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        r#"
experiment = "thermal-ff"
n_points = 100
dx = -1.0
wavelength = 1.0
focal_length = 1.0
n_max = 1.0
coherence_length = 1.0
shots = 1
"#,
    )
    .unwrap();
    let out = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    let text = stdout(&out);
    for code in ["GRID_NOT_POWER_OF_TWO", "GRID_SPACING_NOT_POSITIVE", "INSUFFICIENT_SHOTS"] {
        assert!(text.contains(code), "missing {code} in\n{text}");
    }
}

#[test]
fn oracle_prints_one_row_per_pixel() {
    let out = bin().args(["oracle", "--config"]).arg(config("thermal_2f.toml")).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# x2_index,x2_meters,G_oracle"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 32);
    for (k, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 3);
        assert_eq!(cols[0].parse::<usize>().unwrap(), k);
        assert!(cols[2].parse::<f64>().unwrap().is_finite());
    }
}

#[test]
fn run_writes_outputs_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "--config"])
        .arg(config("thermal_2f.toml"))
        .args(["--shots", "600", "--seed", "9", "--threads", "3", "--out-dir"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());

    let g = std::fs::read_to_string(dir.path().join("G.csv")).unwrap();
    assert!(g.contains("# x2_index,x2_meters,G_mc,G_oracle,visibility"));
    let rows: Vec<&str> = g.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().all(|r| r.split(',').count() == 5));
    assert!(std::fs::read_to_string(dir.path().join("stats.csv")).unwrap().contains("shots,600"));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["shots"], 600);
    assert_eq!(manifest["master_seed"], 9);
    assert_eq!(manifest["threads"], 3);
    assert_eq!(manifest["deterministic"], false);
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let status = bin()
            .args(["run", "--config"])
            .arg(config("pdc_statistics.toml"))
            .args(["--shots", "500", "--deterministic", "--out-dir"])
            .arg(d.path())
            .status()
            .unwrap();
        assert!(status.success());
    }
    for f in ["G.csv", "stats.csv", "manifest.json"] {
        assert_eq!(
            std::fs::read(dirs[0].path().join(f)).unwrap(),
            std::fs::read(dirs[1].path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn missing_config_fails() {
    let out = bin().args(["run", "--config", "/nonexistent/x.toml"]).output().unwrap();
    assert!(!out.status.success());
}
