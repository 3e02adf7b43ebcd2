//! Experiment drivers behind the command-line surface: tuning runs across
//! a population, one-shot characterization with fitted constants, extreme
//! -die voltage projections, and large-population validation — plus the
//! CSV emitters for each. Everything here is concrete `f64`.

use rayon::prelude::*;

use crate::characterize::{
    self, fit_sf, fit_sv, fit_sv_descent, min_safe_voltage, run_sweep, validate_params,
    FittedParams, SweepGrid, SweepResult, ValidationReport,
};
use crate::config::Config;
use crate::device::{
    generate_population, run_stress_test, ChipSample, SpeedBin, StressOutcome, ThermalState,
};
use crate::error::Result;
use crate::measure::{measure_slowest_ro, warm_up};
use crate::tuner::{tune_from, SupplyState};

/// One tuned point of a population experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRow {
    /// Die identifier.
    pub sample_id: u32,
    /// Die bin.
    pub bin: SpeedBin,
    /// Core clock, hertz.
    pub f_core: f64,
    /// Repeat index (tuning is deterministic; repeats document that).
    pub repeat: u32,
    /// Boot voltage, volts.
    pub v_before: f64,
    /// Tuned voltage, volts.
    pub v_after: f64,
    /// Static power at `v_after` over static power at `v_before`.
    pub static_ratio: f64,
    /// Dynamic power at `v_after` over dynamic power at `v_before`.
    pub dynamic_ratio: f64,
    /// Stress outcome at the tuned point, hot.
    pub outcome: StressOutcome,
    /// Conservatism gap over the brute-force safe minimum, volts.
    pub gap: f64,
    /// Whether a regulator limit clipped the prediction.
    pub clamped: bool,
}

/// Per-frequency aggregate of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentSummary {
    /// Core clock, hertz.
    pub f_core: f64,
    /// Rows aggregated.
    pub n: usize,
    /// Mean tuned voltage, volts.
    pub mean_v_after: f64,
    /// Mean static power ratio.
    pub mean_static_ratio: f64,
    /// Mean dynamic power ratio.
    pub mean_dynamic_ratio: f64,
    /// Rows that failed the stress test.
    pub n_failure: usize,
    /// Rows that crashed.
    pub n_crash: usize,
}

/// Full result of [`run_tune_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct TuneExperiment {
    /// Rows ordered (sample, frequency, repeat).
    pub rows: Vec<ExperimentRow>,
    /// One aggregate per requested frequency, in request order.
    pub summaries: Vec<ExperimentSummary>,
}

/// Tunes every die of the configured population at every requested clock
/// and stress-tests each result. Each repeat boots fresh from nominal.
pub fn run_tune_experiment(cfg: &Config, freqs_hz: &[u64], repeats: u32) -> Result<TuneExperiment> {
    let pop: Vec<ChipSample> = generate_population(&cfg.population_spec(), cfg.seed);
    let tp = cfg.tuning_params();
    let mcfg = cfg.measurement_config();
    let ap = cfg.activity_params();
    let g_fail = cfg.stress.g_fail;
    let boot_v = cfg.supply.v_nominal;

    let per_sample: Vec<Result<Vec<ExperimentRow>>> = pop
        .par_iter()
        .map(|sample| {
            let mut rows = Vec::with_capacity(freqs_hz.len() * repeats as usize);
            for &f_hz in freqs_hz {
                let pll = cfg.pll_for(f_hz)?;
                for repeat in 0..repeats {
                    let boot = SupplyState::new(boot_v, &tp.limits)?;
                    let start = ThermalState::ambient(&sample.thermal);
                    let (report, _, hot) = tune_from(sample, &pll, &tp, &mcfg, &ap, boot, start)?;
                    let outcome =
                        run_stress_test(sample, report.v_after, report.f_core, hot.temperature, g_fail)?;
                    let oracle =
                        min_safe_voltage(sample, report.f_core, &tp.limits, hot.temperature, g_fail)?;
                    rows.push(ExperimentRow {
                        sample_id: sample.id,
                        bin: sample.bin,
                        f_core: report.f_core,
                        repeat,
                        v_before: report.v_before,
                        v_after: report.v_after,
                        static_ratio: ratio(report.power_after.static_w, report.power_before.static_w),
                        dynamic_ratio: ratio(report.power_after.dynamic_w, report.power_before.dynamic_w),
                        outcome,
                        gap: report.v_after - oracle,
                        clamped: report.clamped,
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_sample {
        rows.extend(r?);
    }

    let summaries = freqs_hz
        .iter()
        .map(|&f_hz| {
            let f = f_hz as f64;
            let group: Vec<&ExperimentRow> =
                rows.iter().filter(|r| r.f_core == f).collect();
            let n = group.len();
            let mean = |pick: fn(&ExperimentRow) -> f64| {
                if n == 0 { 0.0 } else { group.iter().map(|r| pick(r)).sum::<f64>() / n as f64 }
            };
            ExperimentSummary {
                f_core: f,
                n,
                mean_v_after: mean(|r| r.v_after),
                mean_static_ratio: mean(|r| r.static_ratio),
                mean_dynamic_ratio: mean(|r| r.dynamic_ratio),
                n_failure: group.iter().filter(|r| r.outcome == StressOutcome::Failure).count(),
                n_crash: group.iter().filter(|r| r.outcome == StressOutcome::Crash).count(),
            }
        })
        .collect();
    Ok(TuneExperiment { rows, summaries })
}

fn ratio(after: f64, before: f64) -> f64 {
    if before == 0.0 {
        1.0
    } else {
        after / before
    }
}

/// Result of [`run_characterize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Characterization {
    /// The raw sweep, for CSV emission.
    pub sweep: SweepResult,
    /// Fitted tuner constants.
    pub fitted: FittedParams,
    /// `[tuning]` TOML fragment ready to paste into a config.
    pub toml_fragment: String,
}

/// Sweeps the configured population and fits the tuner constants.
pub fn run_characterize(cfg: &Config) -> Result<Characterization> {
    let pop: Vec<ChipSample> = generate_population(&cfg.population_spec(), cfg.seed);
    let limits = cfg.supply_limits();
    let grid = SweepGrid::characterization_default(&limits);
    grid.validate(&limits)?;
    let sweep = run_sweep(&pop, &grid, &cfg.measurement_config(), cfg.stress.g_fail)?;
    let fitted = FittedParams {
        s_f: fit_sf(&sweep, characterize::defaults::SF_MARGIN)?,
        s_v: fit_sv_descent(&sweep, characterize::defaults::SV_DESCENT_MARGIN)?,
        s_v_regression: fit_sv(&sweep, characterize::defaults::SV_MARGIN)?,
    };
    let toml_fragment = format!(
        "[tuning]\ns_f = {:e}\n# descent slope; population regression slope {:e} is for reference only\ns_v = {:e}\n",
        fitted.s_f, fitted.s_v_regression, fitted.s_v,
    );
    Ok(Characterization { sweep, fitted, toml_fragment })
}

/// One projected operating point of an extreme die.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionRow {
    /// Die identifier.
    pub sample_id: u32,
    /// Die bin.
    pub bin: SpeedBin,
    /// Process delay multiplier of the die.
    pub k_p: f64,
    /// Core clock, hertz.
    pub f_core: f64,
    /// Tuned voltage, volts.
    pub v_tuned: f64,
    /// Whether a regulator limit clipped the prediction.
    pub clamped: bool,
}

/// Projection clock grid: 100–560 MHz in 20 MHz steps.
pub fn projection_grid_hz() -> Vec<u64> {
    (0..=23).map(|i| 100_000_000 + 20_000_000 * i).collect()
}

/// Tunes the fastest and the slowest die of the configured population over
/// the projection grid. Extremes are picked by the measured slowest
/// oscillator at nominal voltage, hot — the tuner's own view, not the
/// hidden process parameter.
pub fn run_project(cfg: &Config) -> Result<Vec<ProjectionRow>> {
    let pop: Vec<ChipSample> = generate_population(&cfg.population_spec(), cfg.seed);
    let tp = cfg.tuning_params();
    let mcfg = cfg.measurement_config();
    let ap = cfg.activity_params();

    let mut rated: Vec<(f64, &ChipSample)> = Vec::with_capacity(pop.len());
    for sample in &pop {
        let hot = warm_up(sample, ThermalState::ambient(&sample.thermal), &mcfg, mcfg.virus_power);
        let f_o = measure_slowest_ro(sample, cfg.supply.v_nominal, &hot, &mcfg)?;
        rated.push((f_o, sample));
    }
    let fastest = rated
        .iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).expect("finite readings"))
        .expect("population must not be empty")
        .1;
    let slowest = rated
        .iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).expect("finite readings"))
        .expect("population must not be empty")
        .1;

    let mut rows = Vec::new();
    for sample in [fastest, slowest] {
        for f_hz in projection_grid_hz() {
            let pll = cfg.pll_for(f_hz)?;
            let boot = SupplyState::new(cfg.supply.v_nominal, &tp.limits)?;
            let start = ThermalState::ambient(&sample.thermal);
            let (report, _, _) = tune_from(sample, &pll, &tp, &mcfg, &ap, boot, start)?;
            rows.push(ProjectionRow {
                sample_id: sample.id,
                bin: sample.bin,
                k_p: sample.k_p,
                f_core: report.f_core,
                v_tuned: report.v_after,
                clamped: report.clamped,
            });
        }
    }
    Ok(rows)
}

/// Validates the configured tuner constants on a fresh population of
/// `n_dice`, spread as evenly as possible across the three bins (slow gets
/// the remainder first — the conservative direction).
pub fn run_validate(cfg: &Config, n_dice: u32, freqs_hz: &[u64]) -> Result<ValidationReport> {
    let mut spec = cfg.population_spec();
    spec.n_slow = n_dice.div_ceil(3);
    spec.n_typical = (n_dice + 1) / 3;
    spec.n_fast = n_dice / 3;
    let pop: Vec<ChipSample> = generate_population(&spec, cfg.seed);
    let freqs: Vec<f64> = freqs_hz.iter().map(|&f| f as f64).collect();
    validate_params(
        &cfg.tuning_params(),
        &pop,
        &freqs,
        &cfg.measurement_config(),
        &cfg.activity_params(),
        cfg.pll.osc_hz,
        cfg.stress.g_fail,
    )
}

/// Runs `f` on a dedicated rayon pool of `workers` threads, or inline on
/// the global pool when `workers` is `None`.
pub fn with_worker_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("worker pool")
            .install(f),
        None => f(),
    }
}

/// Formats to six significant digits: plain decimal in mid range,
/// exponent notation outside it, trailing zeros trimmed.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    let text = if (1e-3..1e6).contains(&a) {
        let digits = a.log10().floor() as i32 + 1;
        let decimals = (6 - digits).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    };
    trim_float(&text)
}

fn trim_float(s: &str) -> String {
    let (mantissa, exp) = match s.split_once('e') {
        Some((m, e)) => (m, Some(e)),
        None => (s, None),
    };
    let trimmed = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.')
    } else {
        mantissa
    };
    match exp {
        Some(e) => format!("{trimmed}e{e}"),
        None => trimmed.to_string(),
    }
}

fn csv(lines: impl IntoIterator<Item = String>, header: &str) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Sweep rows as CSV.
pub fn sweep_csv(sweep: &SweepResult) -> String {
    csv(
        sweep.rows.iter().map(|r| {
            format!(
                "{},{},{},{},{}",
                r.sample_id,
                fmt_sig6(r.voltage),
                fmt_sig6(r.freq),
                fmt_sig6(r.ro_hz),
                r.outcome
            )
        }),
        "sample_id,voltage_v,freq_hz,ro_hz,outcome",
    )
}

/// Experiment rows as CSV.
pub fn tune_csv(rows: &[ExperimentRow]) -> String {
    csv(
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.sample_id,
                r.bin,
                fmt_sig6(r.f_core),
                r.repeat,
                fmt_sig6(r.v_before),
                fmt_sig6(r.v_after),
                fmt_sig6(r.static_ratio),
                fmt_sig6(r.dynamic_ratio),
                r.outcome,
                fmt_sig6(r.gap),
                r.clamped,
            )
        }),
        "sample_id,bin,f_core_hz,repeat,v_before_v,v_after_v,static_ratio,dynamic_ratio,outcome,gap_v,clamped",
    )
}

/// Experiment summaries as CSV.
pub fn summary_csv(summaries: &[ExperimentSummary]) -> String {
    csv(
        summaries.iter().map(|s| {
            format!(
                "{},{},{},{},{},{},{}",
                fmt_sig6(s.f_core),
                s.n,
                fmt_sig6(s.mean_v_after),
                fmt_sig6(s.mean_static_ratio),
                fmt_sig6(s.mean_dynamic_ratio),
                s.n_failure,
                s.n_crash,
            )
        }),
        "f_core_hz,n,mean_v_after_v,mean_static_ratio,mean_dynamic_ratio,n_failure,n_crash",
    )
}

/// Projection rows as CSV.
pub fn projection_csv(rows: &[ProjectionRow]) -> String {
    csv(
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.sample_id,
                r.bin,
                fmt_sig6(r.k_p),
                fmt_sig6(r.f_core),
                fmt_sig6(r.v_tuned),
                r.clamped,
            )
        }),
        "sample_id,bin,k_p,f_core_hz,v_tuned_v,clamped",
    )
}

/// Validation rows as CSV.
pub fn validation_csv(report: &ValidationReport) -> String {
    csv(
        report.rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                r.sample_id,
                r.bin,
                fmt_sig6(r.k_p),
                fmt_sig6(r.f_core),
                fmt_sig6(r.v_after),
                r.outcome,
                fmt_sig6(r.gap),
            )
        }),
        "sample_id,bin,k_p,f_core_hz,v_after_v,outcome,gap_v",
    )
}
