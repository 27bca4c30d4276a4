use std::path::Path;
use std::process::Command;

use adaptive_autopilot::scenario::{parse_config, Summary};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_autopilot"))
}

fn summary(dir: &Path) -> Summary {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn print_config_reparses_identically() {
    for kind in ["step", "harmonic", "intercept", "sweep", "tune"] {
        let out = bin()
            .args([
                "print-config",
                "--scenario",
                kind,
                "--alpha-tla",
                "0.5",
                "--seed",
                "9",
                "--ts",
                "0.01",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.autopilot.alpha_tla, 0.5);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.simulation.sample_time_s, 0.01);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, &text).unwrap();
        let again = bin()
            .args(["print-config", "--scenario", kind, "--config"])
            .arg(&path)
            .output()
            .unwrap();
        assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
    }
}

#[test]
fn step_writes_one_file_per_variant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"scenario": "step", "simulation": {"duration_s": 1.0}}"#).unwrap();
    let status = bin()
        .arg("step")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let s = summary(dir.path());
    assert_eq!(s.runs.len(), 2);
    for run in &s.runs {
        assert!(dir.path().join(&run.trajectory_file).exists());
        assert_eq!(run.final_theta.len(), 9);
    }
}

#[test]
fn adaptive_flag_selects_variant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"scenario": "harmonic", "simulation": {"duration_s": 0.5}}"#).unwrap();
    let status = bin()
        .args(["harmonic", "--adaptive", "off", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let s = summary(dir.path());
    assert_eq!(s.runs.len(), 1);
    assert_eq!(s.runs[0].label, "harmonic_fixed");
}

#[test]
fn sweep_summary_has_one_row_per_combination() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"scenario": "sweep", "sweep": {"target": "alpha_tla", "alpha_tla_values": [0.5, 1.0]},
            "simulation": {"duration_s": 0.5}}"#,
    )
    .unwrap();
    let status = bin()
        .arg("sweep")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let s = summary(dir.path());
    assert_eq!(s.runs.len(), 2 * 2);
    let coords: Vec<(f64, String)> = s
        .runs
        .iter()
        .map(|r| (r.sweep.as_ref().unwrap().factor, r.label.clone()))
        .collect();
    assert_eq!(coords[0], (0.5, "sweep_alpha_tla_0.5_fixed".to_string()));
    assert_eq!(coords[3], (1.0, "sweep_alpha_tla_1_adaptive".to_string()));
}

#[test]
fn failed_run_gives_nonzero_exit_and_keeps_other_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["intercept", "--alpha-tla", "0.2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(1));
    let s = summary(dir.path());
    assert_eq!(s.runs.len(), 3);
    assert!(s.runs[0].completed && s.runs[0].miss_distance_m.unwrap() < 5.0);
    let lost = &s.runs[1];
    assert!(!lost.completed && lost.error.is_some());
    assert!(lost.min_range_m.is_some());
}

#[test]
fn invalid_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"scenario": "step", "initial": {"gamma": 0.3}}"#).unwrap();
    let out = bin().arg("step").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown field") && err.contains("bad.json"), "{err}");

    std::fs::write(&cfg, "").unwrap();
    let out = bin().arg("step").arg("--config").arg(&cfg).output().unwrap();
    assert!(String::from_utf8(out.stderr).unwrap().contains("required keys"));
}

#[test]
fn tune_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"scenario": "tune", "tune": {"swarm_size": 3, "iterations": 2}, "simulation": {"duration_s": 1.0}}"#,
    )
    .unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let status = bin()
            .args(["tune", "--seed", "5", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        summary(&out).tune.unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert!((0.0..=20.0).contains(&a.best_r_u));
    assert!((0.0..=15.0).contains(&a.best_log10_r_theta));
}
