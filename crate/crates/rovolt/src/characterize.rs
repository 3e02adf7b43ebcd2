//! One-time characterization: frequency/voltage sweeps against the stress
//! oracle, the brute-force minimum-safe-voltage search, and the fitting of
//! the tuner constants `s_f` and `s_v` from sweep data.
//!
//! Two slope fitters coexist deliberately. [`fit_sv`] is the classic
//! least-squares slope of voltage against oscillator frequency over the safe
//! region, taken at its maximum across dice; it describes the population
//! well but, because oscillator frequency is convex in voltage, it
//! *overestimates* how much voltage a downward move can shed and will
//! undershoot the safe voltage on fast dice. [`fit_sv_descent`] instead
//! takes each die's secant over the top regulator step and the minimum
//! across dice; that bounds the true requirement from below everywhere on a
//! downward path and is what production tuning should run with.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::device::{run_stress_test, ChipSample, SpeedBin, StressOutcome, ThermalState};
use crate::error::{Error, Result};
use crate::float::Real;
use crate::measure::{measure_slowest_ro, warm_up, MeasurementConfig};
use crate::power::ActivityParams;
use crate::tuner::{
    read_core_frequency, target_ro_frequency, tune_from, PllConfig, SupplyLimits, SupplyState,
    TuningParams,
};

/// Characterization defaults.
pub mod defaults {
    /// Relative margin subtracted from the fitted frequency ratio.
    pub const SF_MARGIN: f64 = 0.02;
    /// Relative margin added to the least-squares slope.
    pub const SV_MARGIN: f64 = 0.02;
    /// Relative margin subtracted from the descent slope, covering dice
    /// faster than any observed sample. The default population is chosen
    /// so its fastest die sits within this margin of the process corner
    /// (lowest delay multiplier, no sensor mismatch), which makes the
    /// deflated slope a lower bound on every manufacturable die's secant.
    pub const SV_DESCENT_MARGIN: f64 = 0.04;
    /// Top of the characterization voltage window, volts (sweeps cover
    /// `v_min` up to here, not the full regulator range).
    pub const CHAR_V_MAX: f64 = 1.0;
    /// Stress frequencies of the default sweep, MHz.
    pub const CHAR_FREQS_MHZ: [u32; 5] = [100, 200, 300, 400, 500];
}

/// Voltage × frequency grid for a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid<T = f64> {
    /// Ascending step-aligned supply voltages, volts.
    pub voltages: Vec<T>,
    /// Ascending core frequencies, hertz.
    pub frequencies: Vec<T>,
}

impl<T: Real> SweepGrid<T> {
    /// Default characterization grid: every regulator step from `v_min` to
    /// 1.0 V, against 100–500 MHz in 100 MHz steps.
    pub fn characterization_default(limits: &SupplyLimits<T>) -> Self {
        let top = T::of(defaults::CHAR_V_MAX).min(limits.v_max);
        let n = ((top - limits.v_min) / limits.step).round().as_f64() as u32;
        let voltages = (0..=n)
            .map(|i| limits.snap(limits.v_min + T::of(f64::from(i)) * limits.step))
            .collect();
        let frequencies = defaults::CHAR_FREQS_MHZ
            .iter()
            .map(|&mhz| T::of(f64::from(mhz) * 1e6))
            .collect();
        SweepGrid { voltages, frequencies }
    }

    /// Checks shape, ordering, range, and grid alignment.
    pub fn validate(&self, limits: &SupplyLimits<T>) -> Result<()> {
        if self.voltages.is_empty() || self.frequencies.is_empty() {
            return Err(Error::Degenerate { what: "sweep grid must not be empty" });
        }
        for w in self.voltages.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Degenerate { what: "sweep voltages must ascend" });
            }
        }
        for w in self.frequencies.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Degenerate { what: "sweep frequencies must ascend" });
            }
        }
        for &v in &self.voltages {
            SupplyState::new(v, limits)?;
        }
        Ok(())
    }
}

/// One stress-test point of a sweep. `ro_hz` is the measured slowest
/// oscillator at `(sample, voltage)`, repeated across that voltage's rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T = f64> {
    /// Die identifier.
    pub sample_id: u32,
    /// Supply voltage at the point, volts.
    pub voltage: T,
    /// Core clock under stress, hertz.
    pub freq: T,
    /// Measured slowest oscillator at this voltage (hot), hertz.
    pub ro_hz: T,
    /// Stress outcome at the point.
    pub outcome: StressOutcome,
}

/// All rows of one sweep, ordered (sample, voltage, frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T = f64> {
    /// Flat row list.
    pub rows: Vec<SweepRow<T>>,
}

impl<T: Real> SweepResult<T> {
    /// Distinct sample ids in row order.
    pub fn sample_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.rows.iter().map(|r| r.sample_id).collect();
        ids.dedup();
        ids
    }
}

/// Post-warm-up junction temperature for a die under the configured virus.
pub fn hot_temperature<T: Real>(sample: &ChipSample<T>, mcfg: &MeasurementConfig<T>) -> T {
    warm_up(sample, ThermalState::ambient(&sample.thermal), mcfg, mcfg.virus_power).temperature
}

/// Runs the full stress sweep: per die, warm up once, measure the slowest
/// oscillator at every grid voltage, stress-test every grid frequency
/// there. Dice are processed in parallel; rows come back in deterministic
/// (sample, voltage, frequency) order regardless of worker count.
pub fn run_sweep<T: Real>(
    population: &[ChipSample<T>],
    grid: &SweepGrid<T>,
    mcfg: &MeasurementConfig<T>,
    g_fail: T,
) -> Result<SweepResult<T>> {
    let per_sample: Vec<Result<Vec<SweepRow<T>>>> = population
        .par_iter()
        .map(|sample| {
            let hot = warm_up(sample, ThermalState::ambient(&sample.thermal), mcfg, mcfg.virus_power);
            let mut rows = Vec::with_capacity(grid.voltages.len() * grid.frequencies.len());
            for &v in &grid.voltages {
                let ro_hz = measure_slowest_ro(sample, v, &hot, mcfg)?;
                for &f in &grid.frequencies {
                    let outcome = run_stress_test(sample, v, f, hot.temperature, g_fail)?;
                    rows.push(SweepRow { sample_id: sample.id, voltage: v, freq: f, ro_hz, outcome });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_sample {
        rows.extend(r?);
    }
    Ok(SweepResult { rows })
}

/// Smallest step-aligned voltage at which the die passes the stress test at
/// clock `f` — and keeps passing at every higher grid voltage. Bisection
/// over the monotone outcome boundary.
///
/// Errors with [`Error::Infeasible`] when even `v_max` fails.
pub fn min_safe_voltage<T: Real>(
    sample: &ChipSample<T>,
    f: T,
    limits: &SupplyLimits<T>,
    t_hot: T,
    g_fail: T,
) -> Result<T> {
    let n = ((limits.v_max - limits.v_min) / limits.step).round().as_f64() as u32;
    let grid_v = |i: u32| limits.snap(limits.v_min + T::of(f64::from(i)) * limits.step);
    let passes = |i: u32| -> Result<bool> {
        Ok(run_stress_test(sample, grid_v(i), f, t_hot, g_fail)? == StressOutcome::Success)
    };
    if !passes(n)? {
        return Err(Error::Infeasible { f_hz: f.as_f64(), v_max: limits.v_max.as_f64() });
    }
    if passes(0)? {
        return Ok(grid_v(0));
    }
    // Invariant: grid_v(lo) fails, grid_v(hi) passes.
    let (mut lo, mut hi) = (0u32, n);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(grid_v(hi))
}

/// Fitted tuner constants plus the diagnostic regression slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedParams<T = f64> {
    /// Conservative core-to-oscillator ratio from [`fit_sf`].
    pub s_f: T,
    /// Operative voltage slope from [`fit_sv_descent`], volts per hertz.
    pub s_v: T,
    /// Population least-squares slope from [`fit_sv`], volts per hertz.
    /// Larger than `s_v`; safe only for upward moves.
    pub s_v_regression: T,
}

/// Per-sample, per-frequency view of sweep rows, voltage-ascending.
fn by_sample_freq<T: Real>(
    sweep: &SweepResult<T>,
) -> BTreeMap<u32, BTreeMap<u64, Vec<SweepRow<T>>>> {
    let mut map: BTreeMap<u32, BTreeMap<u64, Vec<SweepRow<T>>>> = BTreeMap::new();
    for row in &sweep.rows {
        map.entry(row.sample_id)
            .or_default()
            .entry(row.freq.as_f64().to_bits())
            .or_default()
            .push(*row);
    }
    for freqs in map.values_mut() {
        for rows in freqs.values_mut() {
            rows.sort_by(|a, b| a.voltage.partial_cmp(&b.voltage).expect("finite voltages"));
        }
    }
    map
}

/// Distinct (voltage, measured oscillator) points per sample, ascending.
fn points_per_sample<T: Real>(sweep: &SweepResult<T>) -> BTreeMap<u32, Vec<(T, T)>> {
    let mut map: BTreeMap<u32, BTreeMap<u64, (T, T)>> = BTreeMap::new();
    for row in &sweep.rows {
        map.entry(row.sample_id)
            .or_default()
            .entry(row.voltage.as_f64().to_bits())
            .or_insert((row.voltage, row.ro_hz));
    }
    map.into_iter().map(|(id, pts)| (id, pts.into_values().collect())).collect()
}

/// Fits the conservative core-to-oscillator ratio from sweep outcomes.
///
/// For every (die, frequency) whose pass/fail boundary is bracketed inside
/// the sweep, the ratio `f / F_o(boundary voltage)` bounds the usable `s_f`
/// for that pair; the fit is the minimum over pairs, deflated by `margin`.
/// Pairs that pass at the lowest swept voltage (boundary below the grid) or
/// fail everywhere (frequency out of reach) carry no boundary information
/// and are skipped.
pub fn fit_sf<T: Real>(sweep: &SweepResult<T>, margin: T) -> Result<T> {
    let mut best: Option<T> = None;
    for freqs in by_sample_freq(sweep).values() {
        for rows in freqs.values() {
            // Longest all-Success suffix of the voltage-ascending rows.
            let mut boundary = rows.len();
            while boundary > 0 && rows[boundary - 1].outcome == StressOutcome::Success {
                boundary -= 1;
            }
            if boundary == rows.len() {
                continue; // never passes: no boundary to see
            }
            if boundary == 0 {
                continue; // passes everywhere: boundary below the grid
            }
            let at = rows[boundary];
            let ratio = at.freq / at.ro_hz;
            best = Some(match best {
                Some(b) => b.min(ratio),
                None => ratio,
            });
        }
    }
    let best = best.ok_or(Error::Degenerate { what: "no bracketed safety boundary in sweep" })?;
    Ok(best * (T::one() - margin))
}

/// Population least-squares voltage slope (volts per oscillator hertz).
///
/// Per die, ordinary least squares of voltage on measured oscillator
/// frequency over the die's safe region — voltages where every swept
/// frequency passes — taken at its maximum across dice and inflated by
/// `margin`. Conservative for upward moves; see the module docs for why
/// downward tuning uses [`fit_sv_descent`] instead.
pub fn fit_sv<T: Real>(sweep: &SweepResult<T>, margin: T) -> Result<T> {
    let grouped = by_sample_freq(sweep);
    let mut worst: Option<T> = None;
    for freqs in grouped.values() {
        // Safe voltages: pass at every frequency.
        let mut safe: BTreeMap<u64, (T, T)> = BTreeMap::new();
        let mut unsafe_v: Vec<u64> = Vec::new();
        for rows in freqs.values() {
            for row in rows {
                let key = row.voltage.as_f64().to_bits();
                if row.outcome == StressOutcome::Success {
                    safe.entry(key).or_insert((row.ro_hz, row.voltage));
                } else {
                    unsafe_v.push(key);
                }
            }
        }
        for key in unsafe_v {
            safe.remove(&key);
        }
        if safe.len() < 2 {
            return Err(Error::Degenerate { what: "fewer than two safe voltage points for a die" });
        }
        let pts: Vec<(T, T)> = safe.into_values().collect();
        let slope = lsq_slope(&pts)?;
        worst = Some(match worst {
            Some(w) => w.max(slope),
            None => slope,
        });
    }
    let worst = worst.ok_or(Error::Degenerate { what: "empty sweep" })?;
    Ok(worst * (T::one() + margin))
}

/// Descent voltage slope (volts per oscillator hertz): each die's secant
/// over the top regulator step of the sweep, at its minimum across dice,
/// deflated by `margin`.
///
/// Frequency is convex in voltage, so the top-step secant is the smallest
/// voltage-per-hertz anywhere below it on the same die; the cross-die
/// minimum plus margin therefore never overestimates how much voltage a
/// downward move can shed, which is exactly the safe direction.
pub fn fit_sv_descent<T: Real>(sweep: &SweepResult<T>, margin: T) -> Result<T> {
    let mut best: Option<T> = None;
    for (_, pts) in points_per_sample(sweep) {
        if pts.len() < 2 {
            return Err(Error::Degenerate { what: "fewer than two voltage points for a die" });
        }
        let (v_lo, f_lo) = pts[pts.len() - 2];
        let (v_hi, f_hi) = pts[pts.len() - 1];
        if f_hi <= f_lo {
            return Err(Error::Degenerate { what: "oscillator frequency not increasing over top step" });
        }
        let slope = (v_hi - v_lo) / (f_hi - f_lo);
        best = Some(match best {
            Some(b) => b.min(slope),
            None => slope,
        });
    }
    let best = best.ok_or(Error::Degenerate { what: "empty sweep" })?;
    Ok(best * (T::one() - margin))
}

/// Ordinary least-squares slope of v on F for `(F, v)` points.
fn lsq_slope<T: Real>(pts: &[(T, T)]) -> Result<T> {
    let n = T::of(pts.len() as f64);
    let (mut sf, mut sv) = (T::zero(), T::zero());
    for &(f, v) in pts {
        sf += f;
        sv += v;
    }
    let (fbar, vbar) = (sf / n, sv / n);
    let (mut num, mut den) = (T::zero(), T::zero());
    for &(f, v) in pts {
        num += (f - fbar) * (v - vbar);
        den += (f - fbar) * (f - fbar);
    }
    if den <= T::zero() {
        return Err(Error::Degenerate { what: "single distinct frequency in regression" });
    }
    Ok(num / den)
}

/// One die × frequency validation record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationRow<T = f64> {
    /// Die identifier.
    pub sample_id: u32,
    /// Die bin.
    pub bin: SpeedBin,
    /// Process delay multiplier of the die.
    pub k_p: T,
    /// Core clock validated, hertz.
    pub f_core: T,
    /// Voltage the tuner chose, volts.
    pub v_after: T,
    /// Stress outcome at the tuned point.
    pub outcome: StressOutcome,
    /// Conservatism gap `v_after − min_safe_voltage`, volts.
    pub gap: T,
}

/// Outcome of validating tuning parameters across a population.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<T = f64> {
    /// Per (die, frequency) records, ordered (sample, frequency).
    pub rows: Vec<ValidationRow<T>>,
    /// Rows that ended in [`StressOutcome::Failure`].
    pub n_failure: usize,
    /// Rows that ended in [`StressOutcome::Crash`].
    pub n_crash: usize,
    /// Median conservatism gap, volts.
    pub gap_p50: T,
    /// 95th-percentile conservatism gap, volts.
    pub gap_p95: T,
    /// Largest conservatism gap, volts.
    pub gap_max: T,
}

impl<T: Real> ValidationReport<T> {
    /// True when no die failed or crashed at its tuned point.
    pub fn passes(&self) -> bool {
        self.n_failure == 0 && self.n_crash == 0
    }
}

/// Tunes every die at every frequency and stress-tests the result against
/// the brute-force oracle. Dice run in parallel; rows come back ordered
/// (sample, frequency).
pub fn validate_params<T: Real>(
    tp: &TuningParams<T>,
    population: &[ChipSample<T>],
    freqs: &[T],
    mcfg: &MeasurementConfig<T>,
    ap: &ActivityParams<T>,
    osc_hz: u64,
    g_fail: T,
) -> Result<ValidationReport<T>> {
    let per_sample: Vec<Result<Vec<ValidationRow<T>>>> = population
        .par_iter()
        .map(|sample| {
            let mut rows = Vec::with_capacity(freqs.len());
            for &f in freqs {
                let pll = PllConfig::for_frequency(osc_hz, f.as_f64().round() as u64)?;
                debug_assert_eq!(read_core_frequency::<T>(&pll)?, f);
                let boot = SupplyState::new(T::of(crate::tuner::defaults::V_NOMINAL), &tp.limits)?;
                let (report, _, hot) =
                    tune_from(sample, &pll, tp, mcfg, ap, boot, ThermalState::ambient(&sample.thermal))?;
                let outcome =
                    run_stress_test(sample, report.v_after, f, hot.temperature, g_fail)?;
                let oracle = min_safe_voltage(sample, f, &tp.limits, hot.temperature, g_fail)?;
                rows.push(ValidationRow {
                    sample_id: sample.id,
                    bin: sample.bin,
                    k_p: sample.k_p,
                    f_core: f,
                    v_after: report.v_after,
                    outcome,
                    gap: report.v_after - oracle,
                });
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_sample {
        rows.extend(r?);
    }

    let n_failure = rows.iter().filter(|r| r.outcome == StressOutcome::Failure).count();
    let n_crash = rows.iter().filter(|r| r.outcome == StressOutcome::Crash).count();
    let mut gaps: Vec<T> = rows.iter().map(|r| r.gap).collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite gaps"));
    let pct = |p: f64| -> T {
        if gaps.is_empty() {
            return T::zero();
        }
        let rank = ((p * gaps.len() as f64).ceil() as usize).clamp(1, gaps.len());
        gaps[rank - 1]
    };
    Ok(ValidationReport {
        n_failure,
        n_crash,
        gap_p50: pct(0.50),
        gap_p95: pct(0.95),
        gap_max: gaps.last().copied().unwrap_or_else(T::zero),
        rows,
    })
}

/// Convenience: target oscillator frequency a fitted ratio implies for a
/// core clock (used by reports and projections).
pub fn implied_ro_target<T: Real>(f_core: T, tp: &TuningParams<T>) -> T {
    target_ro_frequency(f_core, tp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{self, generate_population, DelayParams, PopulationSpec, RingOscillator, ThermalParams, RO_SLOTS};
    use approx::assert_relative_eq;

    fn die(id: u32, k_p: f64, s_real: f64) -> ChipSample {
        ChipSample {
            id,
            bin: SpeedBin::Typical,
            k_p,
            ros: RO_SLOTS
                .iter()
                .map(|&(kind, location)| RingOscillator {
                    kind,
                    location,
                    n_inverters: device::defaults::N_INVERTERS,
                    k_ro: 1.01,
                })
                .collect(),
            s_real,
            thermal: ThermalParams::default(),
            delay: DelayParams::default(),
            i_leak0: crate::power::defaults::I_LEAK0,
            c_sw: crate::power::defaults::C_SW,
        }
    }

    /// Hand-built sweep with exactly linear F_o(v) and all-Success outcomes.
    fn linear_sweep(slope_v_per_hz: f64, samples: u32) -> SweepResult {
        let mut rows = Vec::new();
        for id in 0..samples {
            for i in 0..=20u32 {
                let v = 0.8 + 0.01 * f64::from(i);
                let ro = (v - 0.2) / slope_v_per_hz;
                for f in [3.0e8, 4.0e8] {
                    rows.push(SweepRow {
                        sample_id: id,
                        voltage: v,
                        freq: f,
                        ro_hz: ro,
                        outcome: StressOutcome::Success,
                    });
                }
            }
        }
        SweepResult { rows }
    }

    #[test]
    fn lsq_fit_recovers_linear_slope_exactly() {
        let sweep = linear_sweep(1.25e-9, 3);
        let s = fit_sv(&sweep, 0.0).unwrap();
        assert_relative_eq!(s, 1.25e-9, max_relative = 1e-6);
        let s = fit_sv_descent(&sweep, 0.0).unwrap();
        assert_relative_eq!(s, 1.25e-9, max_relative = 1e-6);
    }

    #[test]
    fn sv_margin_inflates_and_descent_margin_deflates() {
        let sweep = linear_sweep(1.0e-9, 1);
        let base = fit_sv(&sweep, 0.0).unwrap();
        assert!(fit_sv(&sweep, 0.02).unwrap() > base);
        let dbase = fit_sv_descent(&sweep, 0.0).unwrap();
        assert!(fit_sv_descent(&sweep, 0.06).unwrap() < dbase);
    }

    #[test]
    fn single_voltage_sweep_is_degenerate_for_slope_fits() {
        let mut sweep = linear_sweep(1.0e-9, 1);
        sweep.rows.retain(|r| (r.voltage - 0.8).abs() < 1e-12);
        assert!(matches!(fit_sv(&sweep, 0.0), Err(Error::Degenerate { .. })));
        assert!(matches!(fit_sv_descent(&sweep, 0.0), Err(Error::Degenerate { .. })));
    }

    /// Hand-built single-die sweep with a known pass/fail boundary.
    fn boundary_sweep(boundary_v: f64) -> SweepResult {
        let mut rows = Vec::new();
        for i in 0..=20u32 {
            let v = 0.8 + 0.01 * f64::from(i);
            let ro = 2.0e8 + 2.0e8 * (v - 0.8); // arbitrary increasing
            let outcome = if v >= boundary_v - 1e-12 {
                StressOutcome::Success
            } else {
                StressOutcome::Failure
            };
            rows.push(SweepRow { sample_id: 0, voltage: v, freq: 4.0e8, ro_hz: ro, outcome });
        }
        SweepResult { rows }
    }

    #[test]
    fn sf_fit_reads_the_boundary_ratio_less_margin() {
        let sweep = boundary_sweep(0.9);
        let ro_at_boundary = 2.0e8 + 2.0e8 * (0.9 - 0.8);
        let expect = 4.0e8 / ro_at_boundary;
        assert_relative_eq!(fit_sf(&sweep, 0.0).unwrap(), expect, max_relative = 1e-9);
        assert_relative_eq!(
            fit_sf(&sweep, 0.02).unwrap(),
            expect * 0.98,
            max_relative = 1e-9
        );
        // Widening the margin lowers the fit.
        assert!(fit_sf(&sweep, 0.05).unwrap() < fit_sf(&sweep, 0.02).unwrap());
    }

    #[test]
    fn sf_fit_skips_unbracketed_pairs() {
        // Add a frequency that passes everywhere (boundary below the grid);
        // it must not drag the minimum down.
        let mut sweep = boundary_sweep(0.9);
        let easy: Vec<SweepRow> = sweep
            .rows
            .iter()
            .map(|r| SweepRow { freq: 1.0e8, outcome: StressOutcome::Success, ..*r })
            .collect();
        let with_easy = SweepResult { rows: sweep.rows.iter().chain(&easy).copied().collect() };
        assert_relative_eq!(
            fit_sf(&with_easy, 0.0).unwrap(),
            fit_sf(&sweep, 0.0).unwrap(),
            max_relative = 1e-12
        );
        // A frequency that never passes is equally uninformative.
        let hopeless: Vec<SweepRow> = sweep
            .rows
            .iter()
            .map(|r| SweepRow { freq: 9.0e8, outcome: StressOutcome::Crash, ..*r })
            .collect();
        sweep.rows.extend(hopeless);
        assert_relative_eq!(
            fit_sf(&sweep, 0.0).unwrap(),
            4.0e8 / (2.0e8 + 2.0e8 * 0.1),
            max_relative = 1e-9
        );
    }

    #[test]
    fn sf_fit_with_no_boundaries_is_degenerate() {
        let sweep = linear_sweep(1.0e-9, 2); // all Success everywhere
        assert!(matches!(fit_sf(&sweep, 0.0), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn model_sweep_shape_and_monotone_outcomes() {
        let pop = vec![die(0, 1.0, 1.8), die(1, 0.94, 1.76)];
        let grid = SweepGrid::characterization_default(&SupplyLimits::default());
        let mcfg = MeasurementConfig::default();
        let sweep = run_sweep(&pop, &grid, &mcfg, 0.02).unwrap();
        assert_eq!(sweep.rows.len(), 2 * grid.voltages.len() * grid.frequencies.len());
        assert_eq!(sweep.sample_ids(), vec![0, 1]);

        // Outcome is monotone nondecreasing in voltage for fixed (die, f).
        for freqs in super::by_sample_freq(&sweep).values() {
            for rows in freqs.values() {
                for w in rows.windows(2) {
                    assert!(w[1].outcome >= w[0].outcome);
                }
            }
        }
        // Same ro reading across frequencies at one (die, voltage).
        let r0: Vec<&SweepRow> =
            sweep.rows.iter().filter(|r| r.sample_id == 0 && (r.voltage - 0.8).abs() < 1e-9).collect();
        assert!(r0.windows(2).all(|w| w[0].ro_hz == w[1].ro_hz));
    }

    #[test]
    fn model_sweep_is_deterministic() {
        let pop = vec![die(0, 1.0, 1.8), die(1, 1.06, 1.85)];
        let grid = SweepGrid::characterization_default(&SupplyLimits::default());
        let mcfg = MeasurementConfig::default();
        let a = run_sweep(&pop, &grid, &mcfg, 0.02).unwrap();
        let b = run_sweep(&pop, &grid, &mcfg, 0.02).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn regression_slope_exceeds_descent_slope_on_convex_model_data() {
        let pop = vec![die(0, 1.0, 1.8), die(1, 1.06, 1.85)];
        let grid = SweepGrid::characterization_default(&SupplyLimits::default());
        let mcfg = MeasurementConfig::default();
        let sweep = run_sweep(&pop, &grid, &mcfg, 0.02).unwrap();
        let lsq = fit_sv(&sweep, 0.0).unwrap();
        let descent = fit_sv_descent(&sweep, 0.0).unwrap();
        assert!(
            lsq > descent,
            "convexity: safe-region regression {lsq} must exceed top-step secant {descent}"
        );
    }

    #[test]
    fn bisection_matches_linear_scan() {
        let limits = SupplyLimits::default();
        let mcfg = MeasurementConfig::default();
        for (k_p, s_real, f) in [(1.0, 1.8, 4.0e8), (0.94, 1.76, 5.0e8), (1.06, 1.88, 3.0e8)] {
            let sample = die(0, k_p, s_real);
            let t_hot = hot_temperature(&sample, &mcfg);
            let fast = min_safe_voltage(&sample, f, &limits, t_hot, 0.02).unwrap();

            // Linear scan oracle.
            let n = ((limits.v_max - limits.v_min) / limits.step).round() as u32;
            let mut scan = None;
            for i in (0..=n).rev() {
                let v = limits.snap(limits.v_min + f64::from(i) * limits.step);
                if run_stress_test(&sample, v, f, t_hot, 0.02).unwrap() == StressOutcome::Success {
                    scan = Some(v);
                } else {
                    break;
                }
            }
            assert_eq!(Some(fast), scan, "k_p={k_p} f={f}");
        }
    }

    #[test]
    fn unreachable_frequency_is_infeasible() {
        let sample = die(0, 1.06, 1.75);
        let mcfg = MeasurementConfig::default();
        let t_hot = hot_temperature(&sample, &mcfg);
        assert!(matches!(
            min_safe_voltage(&sample, 2.0e9, &SupplyLimits::default(), t_hot, 0.02),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn validation_flags_an_oversized_ratio() {
        // s_f = 2.5 exceeds every die's true ratio, so tuned points must
        // fail or crash and the report must say so.
        let pop: Vec<ChipSample> = generate_population(&PopulationSpec::default(), 11);
        let tp = TuningParams { s_f: 2.5, ..Default::default() };
        let mcfg = MeasurementConfig::default();
        let ap = ActivityParams::default();
        let report = validate_params(
            &tp,
            &pop,
            &[5.0e8],
            &mcfg,
            &ap,
            crate::tuner::defaults::OSC_HZ,
            0.02,
        )
        .unwrap();
        assert!(!report.passes());
        assert_eq!(report.rows.len(), pop.len());
        assert!(report.n_failure + report.n_crash > 0);
    }

    #[test]
    fn empty_frequency_list_passes_trivially() {
        let pop = vec![die(0, 1.0, 1.8)];
        let report = validate_params(
            &TuningParams::default(),
            &pop,
            &[],
            &MeasurementConfig::default(),
            &ActivityParams::default(),
            crate::tuner::defaults::OSC_HZ,
            0.02,
        )
        .unwrap();
        assert!(report.passes());
        assert!(report.rows.is_empty());
        assert_eq!(report.gap_max, 0.0);
    }

    #[test]
    fn grid_validation_rejects_bad_shapes() {
        let limits = SupplyLimits::default();
        let ok = SweepGrid::characterization_default(&limits);
        assert!(ok.validate(&limits).is_ok());

        let empty = SweepGrid::<f64> { voltages: vec![], frequencies: vec![4.0e8] };
        assert!(empty.validate(&limits).is_err());

        let unsorted = SweepGrid { voltages: vec![0.9, 0.8], frequencies: vec![4.0e8] };
        assert!(unsorted.validate(&limits).is_err());

        let off_grid = SweepGrid { voltages: vec![0.805], frequencies: vec![4.0e8] };
        assert!(off_grid.validate(&limits).is_err());
    }
}
