//! End-to-end checks of the `rovolt` binary: artifact layout, stable CSV
//! headers, exit codes, and config plumbing.

use std::path::Path;
use std::process::{Command, Output};

fn rovolt() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rovolt"));
    c.env_remove("ROVOLT_CONFIG");
    c
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn rovolt");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn first_line(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {path:?}: {e}"));
    text.lines().next().unwrap_or_default().to_string()
}

fn data_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().skip(1).filter(|l| !l.is_empty()).count()
}

#[test]
fn characterize_emits_sweep_fit_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("char");
    let stdout_text = {
        let out_bytes = run_ok(rovolt().args(["characterize", "--out", out.to_str().unwrap()]));
        String::from_utf8(out_bytes.stdout).unwrap()
    };
    assert!(stdout_text.contains("[tuning]"), "stdout fragment missing: {stdout_text}");
    assert!(stdout_text.contains("s_f = ") && stdout_text.contains("s_v = "));

    assert_eq!(first_line(&out.join("sweep.csv")), "sample_id,voltage_v,freq_hz,ro_hz,outcome");
    let fragment = std::fs::read_to_string(out.join("fitted.toml")).unwrap();
    let parsed: toml::Value = toml::from_str(&fragment).expect("fitted.toml parses");
    assert!(parsed.get("tuning").and_then(|t| t.get("s_v")).is_some());

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "characterize");
    assert_eq!(meta["seed"], 40);
    assert!(meta["config"].is_object(), "meta echoes the resolved config");
}

#[test]
fn tune_writes_rows_summary_sidecar_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("tune.csv");
    let out = run_ok(rovolt().args(["tune", "--out", rows.to_str().unwrap()]));

    assert_eq!(
        first_line(&rows),
        "sample_id,bin,f_core_hz,repeat,v_before_v,v_after_v,static_ratio,dynamic_ratio,outcome,gap_v,clamped"
    );
    assert_eq!(data_rows(&rows), 18, "9 dice × 2 clocks");

    let summary = dir.path().join("tune-summary.csv");
    assert_eq!(
        first_line(&summary),
        "f_core_hz,n,mean_v_after_v,mean_static_ratio,mean_dynamic_ratio,n_failure,n_crash"
    );
    assert_eq!(data_rows(&summary), 2);

    let meta_path = dir.path().join("tune.meta.json");
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(meta_path).unwrap()).unwrap();
    assert_eq!(meta["command"], "tune");

    let stdout_text = String::from_utf8(out.stdout).unwrap();
    assert!(stdout_text.contains("f_core_hz"), "summary table on stdout: {stdout_text}");
}

#[test]
fn tune_without_out_prints_rows_to_stdout() {
    let out = run_ok(rovolt().arg("tune"));
    let stdout_text = String::from_utf8(out.stdout).unwrap();
    assert!(stdout_text.contains(
        "sample_id,bin,f_core_hz,repeat,v_before_v,v_after_v,static_ratio,dynamic_ratio,outcome,gap_v,clamped"
    ));
}

#[test]
fn project_emits_two_corner_dice_across_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("proj.csv");
    run_ok(rovolt().args(["project", "--out", out.to_str().unwrap()]));
    assert_eq!(first_line(&out), "sample_id,bin,k_p,f_core_hz,v_tuned_v,clamped");
    assert_eq!(data_rows(&out), 48, "fastest and slowest die × 24 clock points");
}

#[test]
fn validate_clean_population_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("val.csv");
    let run = run_ok(rovolt().args(["validate", "--dice", "20", "--out", out.to_str().unwrap()]));
    let stdout_text = String::from_utf8(run.stdout).unwrap();
    assert!(
        stdout_text.contains("validated 20 dice × 2 clocks: 0 failures, 0 crashes"),
        "summary line: {stdout_text}"
    );
    assert_eq!(first_line(&out), "sample_id,bin,k_p,f_core_hz,v_after_v,outcome,gap_v");
    assert_eq!(data_rows(&out), 40);
}

#[test]
fn validate_flags_an_oversteep_slope_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("oversteep.toml");
    // Twice the calibrated slope: the open-loop step overshoots downward.
    std::fs::write(&cfg, "[tuning]\ns_v = 4e-9\n").unwrap();
    let out = rovolt()
        .args(["--config", cfg.to_str().unwrap(), "validate", "--dice", "20"])
        .output()
        .expect("spawn rovolt");
    assert_eq!(out.status.code(), Some(2), "unsafe population must exit 2");
    let stderr_text = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr_text.lines().any(|l| l.starts_with("unsafe: sample ")),
        "per-die diagnostics expected: {stderr_text}"
    );
    let stdout_text = String::from_utf8(out.stdout).unwrap();
    assert!(stdout_text.contains("crashes"), "summary still printed: {stdout_text}");
}

#[test]
fn invalid_config_exits_one_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[tuning]\ns_f = 0.5\n").unwrap();
    let out = rovolt()
        .args(["--config", cfg.to_str().unwrap(), "tune"])
        .output()
        .expect("spawn rovolt");
    assert_eq!(out.status.code(), Some(1));
    let stderr_text = String::from_utf8(out.stderr).unwrap();
    assert!(stderr_text.starts_with("error:"), "stderr: {stderr_text}");
    assert!(stderr_text.contains("tuning.s_f"), "field name expected: {stderr_text}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    std::fs::write(&cfg, "[tuning]\nsf = 1.7\n").unwrap();
    let out = rovolt()
        .args(["--config", cfg.to_str().unwrap(), "tune"])
        .output()
        .expect("spawn rovolt");
    assert_eq!(out.status.code(), Some(1));
    let stderr_text = String::from_utf8(out.stderr).unwrap();
    assert!(stderr_text.contains("unknown field"), "stderr: {stderr_text}");
}

#[test]
fn config_env_var_matches_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("alt.toml");
    std::fs::write(&cfg, "seed = 7\n").unwrap();
    let by_flag = run_ok(rovolt().args(["--config", cfg.to_str().unwrap(), "validate", "--dice", "10"]));
    let by_env = {
        let mut c = Command::new(env!("CARGO_BIN_EXE_rovolt"));
        c.env("ROVOLT_CONFIG", cfg.to_str().unwrap());
        run_ok(c.args(["validate", "--dice", "10"]))
    };
    assert_eq!(by_flag.stdout, by_env.stdout);
}

#[test]
fn seed_flag_overrides_the_config() {
    let base = run_ok(rovolt().arg("tune"));
    let reseeded = run_ok(rovolt().args(["--seed", "7", "tune"]));
    assert_ne!(base.stdout, reseeded.stdout, "a fresh seed must draw fresh dice");
}
