//! Command-line front end: characterize, tune, project, and validate
//! drivers over the rovolt library, with CSV artifacts and JSON run
//! metadata.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use rovolt::config::Config;
use rovolt::harness::{
    fmt_sig6, projection_csv, run_characterize, run_project, run_tune_experiment, run_validate,
    summary_csv, sweep_csv, tune_csv, validation_csv, with_worker_pool,
};

#[derive(Parser)]
#[command(
    name = "rovolt",
    version,
    about = "Closed-loop supply-voltage tuning against on-die ring oscillators",
    propagate_version = true
)]
struct Cli {
    /// TOML configuration file; built-in defaults apply when omitted.
    #[arg(long, global = true, env = "ROVOLT_CONFIG", value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override the population seed from the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads for population parallelism (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the population against the stress oracle and fit the tuner
    /// constants; prints a ready-to-paste [tuning] fragment.
    Characterize(CharacterizeArgs),
    /// Tune every die at the requested clocks, stress-test each result,
    /// and report voltages and power ratios.
    Tune(TuneArgs),
    /// Project tuned voltage over the clock grid for the fastest and
    /// slowest die.
    Project(ProjectArgs),
    /// Tune a fresh population with the configured constants and check
    /// every result against the brute-force safe minimum.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CharacterizeArgs {
    /// Directory for sweep.csv, fitted.toml, and meta.json.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    /// Core clocks to tune to, Hz.
    #[arg(
        long,
        value_name = "HZ",
        value_delimiter = ',',
        default_values_t = [500_000_000u64, 400_000_000u64]
    )]
    freqs: Vec<u64>,

    /// Tuning repeats per (die, clock), each booting fresh.
    #[arg(long, value_name = "N", default_value_t = 1)]
    repeats: u32,

    /// Row CSV path; a per-clock summary lands next to it as
    /// <stem>-summary.csv. Prints rows to stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    /// Row CSV path; prints to stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Monte-Carlo dice to draw, spread across the three bins.
    #[arg(long, value_name = "N", default_value_t = 100)]
    dice: u32,

    /// Core clocks to validate at, Hz.
    #[arg(
        long,
        value_name = "HZ",
        value_delimiter = ',',
        default_values_t = [400_000_000u64, 500_000_000u64]
    )]
    freqs: Vec<u64>,

    /// Row CSV path; summary always goes to stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let workers = cli.workers;
    match cli.command {
        Command::Characterize(args) => cmd_characterize(&cfg, workers, &args),
        Command::Tune(args) => cmd_tune(&cfg, workers, &args),
        Command::Project(args) => cmd_project(&cfg, workers, &args),
        Command::Validate(args) => cmd_validate(&cfg, workers, &args),
    }
}

fn cmd_characterize(cfg: &Config, workers: Option<usize>, args: &CharacterizeArgs) -> Result<ExitCode> {
    let ch = with_worker_pool(workers, || run_characterize(cfg))?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_artifact(&dir.join("sweep.csv"), &sweep_csv(&ch.sweep))?;
        write_artifact(&dir.join("fitted.toml"), &ch.toml_fragment)?;
        write_meta(&dir.join("meta.json"), "characterize", cfg)?;
    }
    print!("{}", ch.toml_fragment);
    eprintln!(
        "fitted over {} dice: s_f = {}, s_v = {} V/Hz (regression {} V/Hz)",
        ch.sweep.sample_ids().len(),
        fmt_sig6(ch.fitted.s_f),
        fmt_sig6(ch.fitted.s_v),
        fmt_sig6(ch.fitted.s_v_regression),
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_tune(cfg: &Config, workers: Option<usize>, args: &TuneArgs) -> Result<ExitCode> {
    let exp = with_worker_pool(workers, || run_tune_experiment(cfg, &args.freqs, args.repeats))?;
    let rows = tune_csv(&exp.rows);
    let summary = summary_csv(&exp.summaries);
    match &args.out {
        Some(path) => {
            write_artifact(path, &rows)?;
            write_artifact(&sibling(path, "-summary.csv"), &summary)?;
            write_meta(&meta_path(path), "tune", cfg)?;
            print!("{summary}");
        }
        None => print!("{rows}"),
    }
    for s in &exp.summaries {
        eprintln!(
            "{} MHz: mean tuned {} V, dynamic ×{}, static ×{}, {} failures, {} crashes over {} dice",
            fmt_sig6(s.f_core / 1e6),
            fmt_sig6(s.mean_v_after),
            fmt_sig6(s.mean_dynamic_ratio),
            fmt_sig6(s.mean_static_ratio),
            s.n_failure,
            s.n_crash,
            s.n,
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_project(cfg: &Config, workers: Option<usize>, args: &ProjectArgs) -> Result<ExitCode> {
    let rows = with_worker_pool(workers, || run_project(cfg))?;
    let text = projection_csv(&rows);
    match &args.out {
        Some(path) => {
            write_artifact(path, &text)?;
            write_meta(&meta_path(path), "project", cfg)?;
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(cfg: &Config, workers: Option<usize>, args: &ValidateArgs) -> Result<ExitCode> {
    let report = with_worker_pool(workers, || run_validate(cfg, args.dice, &args.freqs))?;
    if let Some(path) = &args.out {
        write_artifact(path, &validation_csv(&report))?;
        write_meta(&meta_path(path), "validate", cfg)?;
    }
    println!(
        "validated {} dice × {} clocks: {} failures, {} crashes; gap p50/p95/max = {}/{}/{} V",
        args.dice,
        args.freqs.len(),
        report.n_failure,
        report.n_crash,
        fmt_sig6(report.gap_p50),
        fmt_sig6(report.gap_p95),
        fmt_sig6(report.gap_max),
    );
    if report.passes() {
        return Ok(ExitCode::SUCCESS);
    }
    const SHOWN: usize = 20;
    for row in report
        .rows
        .iter()
        .filter(|r| r.outcome != rovolt::device::StressOutcome::Success)
        .take(SHOWN)
    {
        eprintln!(
            "unsafe: sample {} ({}, k_p = {}) {} at {} MHz, tuned {} V (gap {} V)",
            row.sample_id,
            row.bin,
            fmt_sig6(row.k_p),
            row.outcome,
            fmt_sig6(row.f_core / 1e6),
            fmt_sig6(row.v_after),
            fmt_sig6(row.gap),
        );
    }
    let unsafe_total = report.n_failure + report.n_crash;
    if unsafe_total > SHOWN {
        eprintln!("… and {} more", unsafe_total - SHOWN);
    }
    Ok(ExitCode::from(2))
}

fn write_artifact(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `<stem>.meta.json` next to an output file.
fn meta_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

/// `<stem><suffix>` next to an output file.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}{suffix}"))
}

/// Reproducibility sidecar: version, verb, seed, and the full effective
/// config (after seed overrides).
fn write_meta(path: &Path, command: &str, cfg: &Config) -> Result<()> {
    let meta = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": cfg.seed,
        "config": cfg,
    });
    write_artifact(path, &format!("{}\n", serde_json::to_string_pretty(&meta)?))
}
