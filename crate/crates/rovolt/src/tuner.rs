//! The production tuning algorithm.
//!
//! Reads the core clock from the PLL, warms the die, measures the slowest
//! ring oscillator, converts the core clock into a target oscillator
//! frequency through the characterization ratio `s_f`, predicts the supply
//! voltage for that target with the linear slope `s_v`, rounds the
//! prediction *up* to the regulator grid, and walks the supply there under
//! the slew limit. The core clock itself is never touched.

use crate::device::{ChipSample, ThermalState};
use crate::error::{Error, Result};
use crate::float::Real;
use crate::measure::{measure_slowest_ro, warm_up, MeasurementConfig};
use crate::power::{power_breakdown, ActivityParams, PowerBreakdown};

/// Tuner and supply defaults.
pub mod defaults {
    /// Regulator range floor, volts.
    pub const V_MIN: f64 = 0.6;
    /// Regulator range ceiling, volts.
    pub const V_MAX: f64 = 1.3;
    /// Regulator step, volts.
    pub const STEP: f64 = 0.010;
    /// Recommended slew rate, volts per microsecond.
    pub const SLEW: f64 = 0.010;
    /// Supply voltage parts boot at, volts.
    pub const V_NOMINAL: f64 = 1.0;
    /// Grid-alignment tolerance for `f64` supplies, volts.
    pub const GRID_TOL: f64 = 1e-9;

    /// Conservative core-to-oscillator frequency ratio.
    pub const S_F: f64 = 1.7;
    /// Conservative voltage-per-oscillator-hertz slope, volts per hertz.
    /// Frozen from `fit_sv_descent` on the default characterization sweep
    /// (default seed and process constants); the characterization test
    /// suite asserts the round trip.
    pub const S_V: f64 = 1.128_630_705_394_194_6e-9;
    /// Additional fixed guard band, volts.
    pub const GUARD_V: f64 = 0.0;

    /// External oscillator feeding the PLL, hertz.
    pub const OSC_HZ: u64 = 25_000_000;

    /// Slope recorded for one production silicon family (XS1-U8A-64), kept
    /// as an order-of-magnitude cross-check for fitted values. The quoted
    /// number is volts per counter LSB of the 85 µs measurement window —
    /// firmware works in raw counts — so the per-hertz equivalent is this
    /// value times the window length.
    pub const SV_REFERENCE_V_PER_COUNT: f64 = 5.95e-6;
}

/// Regulator constraints: range, step grid, slew.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupplyLimits<T = f64> {
    /// Lowest programmable voltage, volts.
    pub v_min: T,
    /// Highest programmable voltage, volts.
    pub v_max: T,
    /// Programming step, volts.
    pub step: T,
    /// Maximum slew rate, volts per microsecond.
    pub slew: T,
}

impl<T: Real> Default for SupplyLimits<T> {
    fn default() -> Self {
        SupplyLimits {
            v_min: T::of(defaults::V_MIN),
            v_max: T::of(defaults::V_MAX),
            step: T::of(defaults::STEP),
            slew: T::of(defaults::SLEW),
        }
    }
}

impl<T: Real> SupplyLimits<T> {
    /// Absolute grid-alignment tolerance, volts. The documented tolerance
    /// for `f64`; widened for scalars whose epsilon cannot resolve it.
    pub fn grid_tol(&self) -> T {
        T::of(defaults::GRID_TOL).max(self.step * T::epsilon() * T::of(16.0))
    }

    /// Whether `v` lies on the step grid (anchored at 0 V) within tolerance.
    pub fn is_on_grid(&self, v: T) -> bool {
        let n = v / self.step;
        (n - n.round()).abs() * self.step <= self.grid_tol()
    }

    /// Nearest grid voltage (canonical representation `n · step`).
    pub fn snap(&self, v: T) -> T {
        (v / self.step).round() * self.step
    }

    /// Seconds a single regulator step takes at the slew limit.
    pub fn step_dwell(&self) -> T {
        self.step / (self.slew * T::of(1e6))
    }
}

/// A supply voltage proven to be in range and on the regulator grid.
///
/// Construction canonicalizes to an exact step multiple, so two states
/// reached by different arithmetic paths compare equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupplyState<T = f64> {
    voltage: T,
}

impl<T: Real> SupplyState<T> {
    /// Validates range and grid alignment, then canonicalizes.
    pub fn new(v: T, limits: &SupplyLimits<T>) -> Result<Self> {
        let tol = limits.grid_tol();
        if v < limits.v_min - tol || v > limits.v_max + tol {
            return Err(Error::VoltageOutOfRange {
                v: v.as_f64(),
                v_min: limits.v_min.as_f64(),
                v_max: limits.v_max.as_f64(),
            });
        }
        if !limits.is_on_grid(v) {
            return Err(Error::VoltageOffGrid { v: v.as_f64(), step: limits.step.as_f64() });
        }
        Ok(SupplyState { voltage: limits.snap(v) })
    }

    /// The programmed voltage, volts.
    pub fn voltage(&self) -> T {
        self.voltage
    }
}

/// PLL configuration the firmware reads the core clock from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PllConfig {
    /// External oscillator, hertz (a compile-time constant on real parts).
    pub osc_hz: u64,
    /// Feedback multiplier.
    pub multiplier: u32,
    /// Core clock divider.
    pub divider: u32,
}

impl PllConfig {
    /// Builds the exact configuration for an integer target frequency:
    /// multiplier/divider in lowest terms of `f_hz / osc_hz`.
    pub fn for_frequency(osc_hz: u64, f_hz: u64) -> Result<Self> {
        if osc_hz == 0 {
            return Err(Error::InvalidConfig { field: "pll.osc_hz", reason: "must be positive".into() });
        }
        if f_hz == 0 {
            return Err(Error::InvalidConfig {
                field: "pll",
                reason: "target frequency must be positive".into(),
            });
        }
        let g = gcd(f_hz, osc_hz);
        let multiplier = u32::try_from(f_hz / g).map_err(|_| Error::InvalidConfig {
            field: "pll",
            reason: format!("multiplier {} exceeds hardware range", f_hz / g),
        })?;
        let divider = u32::try_from(osc_hz / g).map_err(|_| Error::InvalidConfig {
            field: "pll",
            reason: format!("divider {} exceeds hardware range", osc_hz / g),
        })?;
        Ok(PllConfig { osc_hz, multiplier, divider })
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Characterization constants the tuner runs with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningParams<T = f64> {
    /// Core-to-oscillator frequency ratio (conservatively low).
    pub s_f: T,
    /// Voltage change per oscillator hertz (conservatively low for
    /// downward moves), volts per hertz.
    pub s_v: T,
    /// Fixed extra guard band added to every prediction, volts.
    pub guard_v: T,
    /// Regulator constraints.
    pub limits: SupplyLimits<T>,
}

impl<T: Real> Default for TuningParams<T> {
    fn default() -> Self {
        TuningParams {
            s_f: T::of(defaults::S_F),
            s_v: T::of(defaults::S_V),
            guard_v: T::of(defaults::GUARD_V),
            limits: SupplyLimits::default(),
        }
    }
}

/// A voltage prediction after rounding and clamping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetVoltage<T = f64> {
    /// The grid point the supply will be programmed to.
    pub supply: SupplyState<T>,
    /// The unrounded linear prediction, volts.
    pub raw: T,
    /// True when a regulator limit interfered with the prediction (above
    /// `v_max`: the oscillator target is unreachable; below `v_min`: the
    /// regulator floor holds the voltage above the prediction).
    pub clamped: bool,
}

/// One point of a supply trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlewStep<T = f64> {
    /// Voltage after this transition, volts.
    pub voltage: T,
    /// Time offset from the start of the ramp, seconds.
    pub at: T,
}

/// Everything one tuning run decided and observed.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningReport<T = f64> {
    /// Core clock read from the PLL, hertz.
    pub f_core: T,
    /// Measured slowest-oscillator frequency at `v_before`, hot, hertz.
    pub f_o_measured: T,
    /// Oscillator frequency the core clock demands (`f_core / s_f`), hertz.
    pub f_o_target: T,
    /// Supply before tuning, volts.
    pub v_before: T,
    /// Supply after tuning, volts.
    pub v_after: T,
    /// Slew-limited ramp from `v_before` to `v_after`.
    pub trajectory: Vec<SlewStep<T>>,
    /// Whether a regulator limit clipped the prediction.
    pub clamped: bool,
    /// Power at `v_before`, post-warm-up temperature.
    pub power_before: PowerBreakdown<T>,
    /// Power at `v_after`, same temperature and clock.
    pub power_after: PowerBreakdown<T>,
}

/// Core clock encoded in the PLL: `osc_hz · multiplier / divider`.
pub fn read_core_frequency<T: Real>(pll: &PllConfig) -> Result<T> {
    if pll.divider == 0 {
        return Err(Error::ZeroDivider);
    }
    let num = pll.osc_hz as u128 * pll.multiplier as u128;
    let den = pll.divider as u128;
    if num % den == 0 {
        Ok(T::of((num / den) as f64))
    } else {
        Ok(T::of(num as f64 / den as f64))
    }
}

/// Minimum oscillator frequency that supports core clock `f_p`: `f_p / s_f`.
pub fn target_ro_frequency<T: Real>(f_p: T, tp: &TuningParams<T>) -> T {
    debug_assert!(f_p > T::zero());
    f_p / tp.s_f
}

/// Linear voltage prediction for moving the slowest oscillator from
/// `f_o_now` (measured at `v_now`) to `f_o_target`:
///
/// `raw = v_now + s_v·(f_o_target − f_o_now) + guard_v`
///
/// rounded **up** to the next regulator step (never down — rounding must not
/// undershoot the target) and clamped into the programmable range.
pub fn compute_target_voltage<T: Real>(
    v_now: T,
    f_o_now: T,
    f_o_target: T,
    tp: &TuningParams<T>,
) -> Result<TargetVoltage<T>> {
    debug_assert!(f_o_now > T::zero());
    let limits = &tp.limits;
    let raw = v_now + tp.s_v * (f_o_target - f_o_now) + tp.guard_v;
    let stepped = ceil_to_step(raw, limits);
    let (v, clamped) = if stepped > limits.v_max {
        (limits.v_max, true)
    } else if stepped < limits.v_min {
        (limits.v_min, true)
    } else {
        (stepped, false)
    };
    Ok(TargetVoltage { supply: SupplyState::new(v, limits)?, raw, clamped })
}

/// Rounds up to the next step-grid point, treating values already within
/// grid tolerance of a step as on-grid.
fn ceil_to_step<T: Real>(v: T, limits: &SupplyLimits<T>) -> T {
    let n = v / limits.step;
    let nearest = n.round();
    let chosen = if (n - nearest).abs() * limits.step <= limits.grid_tol() {
        nearest
    } else {
        n.ceil()
    };
    chosen * limits.step
}

/// Plans the slew-limited ramp between two grid voltages: one entry per
/// regulator step, uniformly spaced at the slew-limit dwell, ending exactly
/// at `v_to`. Empty when no move is needed.
pub fn plan_slew<T: Real>(v_from: T, v_to: T, limits: &SupplyLimits<T>) -> Vec<SlewStep<T>> {
    let steps = ((v_to - v_from) / limits.step).round();
    let n = steps.abs().as_f64() as u32;
    if n == 0 {
        return Vec::new();
    }
    let dir = if steps > T::zero() { T::one() } else { -T::one() };
    let dwell = limits.step_dwell();
    (1..=n)
        .map(|i| SlewStep {
            voltage: if i == n {
                limits.snap(v_to)
            } else {
                limits.snap(v_from + dir * T::of(f64::from(i)) * limits.step)
            },
            at: T::of(f64::from(i)) * dwell,
        })
        .collect()
}

/// Runs one full tuning pass from nominal boot state (1.0 V supply, ambient
/// temperature). See [`tune_from`] for the sequence.
pub fn tune<T: Real>(
    sample: &ChipSample<T>,
    pll: &PllConfig,
    tp: &TuningParams<T>,
    mcfg: &MeasurementConfig<T>,
    ap: &ActivityParams<T>,
) -> Result<TuningReport<T>> {
    let boot = SupplyState::new(T::of(defaults::V_NOMINAL), &tp.limits)?;
    let start = ThermalState::ambient(&sample.thermal);
    tune_from(sample, pll, tp, mcfg, ap, boot, start).map(|(report, _, _)| report)
}

/// Runs one full tuning pass from an explicit supply and thermal state.
///
/// Sequence: read the core clock from the PLL → warm up under the power
/// virus → measure the slowest ring oscillator at the current voltage →
/// derive the target oscillator frequency → predict and round the target
/// voltage → plan the slew ramp → apply. Returns the report plus the
/// applied supply and the post-warm-up thermal state, so callers can chain
/// passes. The core clock is never modified.
pub fn tune_from<T: Real>(
    sample: &ChipSample<T>,
    pll: &PllConfig,
    tp: &TuningParams<T>,
    mcfg: &MeasurementConfig<T>,
    ap: &ActivityParams<T>,
    supply: SupplyState<T>,
    state: ThermalState<T>,
) -> Result<(TuningReport<T>, SupplyState<T>, ThermalState<T>)> {
    let f_core = read_core_frequency(pll)?;
    let hot = warm_up(sample, state, mcfg, mcfg.virus_power);
    let v_before = supply.voltage();
    let f_o_measured = measure_slowest_ro(sample, v_before, &hot, mcfg)?;
    let f_o_target = target_ro_frequency(f_core, tp);
    let target = compute_target_voltage(v_before, f_o_measured, f_o_target, tp)?;
    let v_after = target.supply.voltage();
    let trajectory = plan_slew(v_before, v_after, &tp.limits);
    let report = TuningReport {
        f_core,
        f_o_measured,
        f_o_target,
        v_before,
        v_after,
        trajectory,
        clamped: target.clamped,
        power_before: power_breakdown(ap, v_before, f_core, hot.temperature),
        power_after: power_breakdown(ap, v_after, f_core, hot.temperature),
    };
    Ok((report, target.supply, hot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{self, DelayParams, RingOscillator, SpeedBin, ThermalParams, RO_SLOTS};
    use approx::assert_relative_eq;

    fn limits() -> SupplyLimits {
        SupplyLimits::default()
    }

    #[test]
    fn supply_state_accepts_grid_points_and_canonicalizes() {
        let l = limits();
        let s = SupplyState::new(0.93, &l).unwrap();
        assert_eq!(s.voltage(), 93.0 * 0.01);
        // A value carrying float dust from arithmetic still lands on grid.
        let dusty = 1.0 - 0.07;
        let s = SupplyState::new(dusty, &l).unwrap();
        assert_eq!(s.voltage(), 93.0 * 0.01);
    }

    #[test]
    fn supply_state_rejects_out_of_range_and_off_grid() {
        let l = limits();
        assert!(matches!(SupplyState::new(0.55, &l), Err(Error::VoltageOutOfRange { .. })));
        assert!(matches!(SupplyState::new(1.35, &l), Err(Error::VoltageOutOfRange { .. })));
        assert!(matches!(SupplyState::new(0.935, &l), Err(Error::VoltageOffGrid { .. })));
    }

    #[test]
    fn pll_readback_matches_hand_values() {
        let f: f64 =
            read_core_frequency(&PllConfig { osc_hz: 25_000_000, multiplier: 20, divider: 1 })
                .unwrap();
        assert_eq!(f, 500.0e6);
        let f: f64 =
            read_core_frequency(&PllConfig { osc_hz: 25_000_000, multiplier: 20, divider: 2 })
                .unwrap();
        assert_eq!(f, 250.0e6);
        let f: f64 =
            read_core_frequency(&PllConfig { osc_hz: 25_000_000, multiplier: 1, divider: 1 })
                .unwrap();
        assert_eq!(f, 25.0e6);
    }

    #[test]
    fn pll_zero_divider_errors() {
        let pll = PllConfig { osc_hz: 25_000_000, multiplier: 20, divider: 0 };
        assert!(matches!(read_core_frequency::<f64>(&pll), Err(Error::ZeroDivider)));
    }

    #[test]
    fn pll_construction_is_exact_over_the_projection_grid() {
        for mhz in (100..=560).step_by(20) {
            let f = mhz as u64 * 1_000_000;
            let pll = PllConfig::for_frequency(defaults::OSC_HZ, f).unwrap();
            let back: f64 = read_core_frequency(&pll).unwrap();
            assert_eq!(back, f as f64, "at {mhz} MHz");
        }
    }

    #[test]
    fn target_ro_frequency_matches_hand_values() {
        let tp = TuningParams::<f64>::default();
        assert_relative_eq!(
            target_ro_frequency(500.0e6, &tp),
            294_117_647.058_823_5,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            target_ro_frequency(400.0e6, &tp),
            235_294_117.647_058_84,
            max_relative = 1e-12
        );
        let unit = TuningParams { s_f: 1.0, ..Default::default() };
        assert_eq!(target_ro_frequency(123.0e6, &unit), 123.0e6);
    }

    #[test]
    fn zero_delta_returns_current_voltage() {
        let tp = TuningParams::<f64>::default();
        let t = compute_target_voltage(0.93, 2.9e8, 2.9e8, &tp).unwrap();
        assert_eq!(t.supply.voltage(), 93.0 * 0.01);
        assert!(!t.clamped);
    }

    #[test]
    fn example_slope_lands_on_930_mv() {
        // s_v = 3.5e-9 V/Hz and a −20 MHz oscillator move: raw 0.93 V.
        let tp = TuningParams { s_v: 3.5e-9, ..Default::default() };
        let t = compute_target_voltage(1.0, 3.0e8, 2.8e8, &tp).unwrap();
        assert_relative_eq!(t.raw, 0.93, max_relative = 1e-12);
        assert_eq!(t.supply.voltage(), 93.0 * 0.01);
        assert!(!t.clamped);
    }

    #[test]
    fn off_grid_raw_rounds_up_never_down() {
        // raw = 1.0 − 0.0695 = 0.9305 → 0.94, not 0.93.
        let tp = TuningParams { s_v: 6.95e-8, ..Default::default() };
        let t = compute_target_voltage(1.0, 2.0e8, 1.99e8, &tp).unwrap();
        assert_relative_eq!(t.raw, 0.9305, max_relative = 1e-12);
        assert_eq!(t.supply.voltage(), 94.0 * 0.01);
    }

    #[test]
    fn prediction_above_ceiling_clamps_with_flag() {
        let tp = TuningParams { s_v: 3.5e-9, ..Default::default() };
        // +200 MHz move wants 1.7 V; the regulator tops out at 1.3 V.
        let t = compute_target_voltage(1.0, 2.0e8, 4.0e8, &tp).unwrap();
        assert_eq!(t.supply.voltage(), 130.0 * 0.01);
        assert!(t.clamped);
    }

    #[test]
    fn prediction_below_floor_clamps_with_flag() {
        let tp = TuningParams { s_v: 3.5e-9, ..Default::default() };
        // −200 MHz move wants 0.3 V; the regulator floors at 0.6 V.
        let t = compute_target_voltage(1.0, 4.0e8, 2.0e8, &tp).unwrap();
        assert_eq!(t.supply.voltage(), 60.0 * 0.01);
        assert!(t.clamped);
    }

    #[test]
    fn guard_band_raises_prediction() {
        let tp = TuningParams { s_v: 3.5e-9, guard_v: 0.02, ..Default::default() };
        let t = compute_target_voltage(1.0, 3.0e8, 2.8e8, &tp).unwrap();
        assert_eq!(t.supply.voltage(), 95.0 * 0.01);
    }

    #[test]
    fn slew_down_70_mv_is_seven_microsecond_steps() {
        let l = limits();
        let steps = plan_slew(1.0, 0.93, &l);
        assert_eq!(steps.len(), 7);
        for (i, s) in steps.iter().enumerate() {
            assert_relative_eq!(s.voltage, 1.0 - 0.01 * (i as f64 + 1.0), max_relative = 1e-9);
            assert_relative_eq!(s.at, 1.0e-6 * (i as f64 + 1.0), max_relative = 1e-12);
        }
        assert_eq!(steps.last().unwrap().voltage, 93.0 * 0.01);
    }

    #[test]
    fn slew_up_140_mv_is_fourteen_ascending_steps() {
        let l = limits();
        let steps = plan_slew(0.86, 1.0, &l);
        assert_eq!(steps.len(), 14);
        assert!(steps.windows(2).all(|w| w[1].voltage > w[0].voltage));
        assert_eq!(steps.last().unwrap().voltage, 100.0 * 0.01);
        // Total ramp time covers |ΔV|/slew = 14 µs.
        assert_relative_eq!(steps.last().unwrap().at, 14.0e-6, max_relative = 1e-12);
    }

    #[test]
    fn slew_no_move_is_empty() {
        assert!(plan_slew(0.93, 0.93, &limits()).is_empty());
    }

    #[test]
    fn slew_respects_rate_between_consecutive_steps() {
        let l = limits();
        let steps = plan_slew(0.72, 1.24, &l);
        let dwell = l.step_dwell();
        let mut prev = 0.0;
        for s in &steps {
            assert!(s.at - prev >= dwell - 1e-12);
            prev = s.at;
        }
    }

    fn die(k_p: f64, s_real: f64, d0: f64) -> ChipSample {
        ChipSample {
            id: 0,
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
            delay: DelayParams { d0, ..Default::default() },
            i_leak0: crate::power::defaults::I_LEAK0,
            c_sw: crate::power::defaults::C_SW,
        }
    }

    #[test]
    fn tune_runs_the_full_sequence_downward() {
        let sample = die(1.0, 1.8, device::defaults::D0);
        let pll = PllConfig::for_frequency(defaults::OSC_HZ, 500_000_000).unwrap();
        let tp = TuningParams::default();
        let mcfg = MeasurementConfig::default();
        let ap = ActivityParams::default();
        let report = tune(&sample, &pll, &tp, &mcfg, &ap).unwrap();

        assert_eq!(report.f_core, 500.0e6);
        assert_eq!(report.v_before, 1.0);
        assert!(report.v_after <= report.v_before);
        assert!(report.v_after >= tp.limits.v_min);
        assert_relative_eq!(report.f_o_target, report.f_core / tp.s_f, max_relative = 1e-12);
        assert!(report.f_o_measured > report.f_o_target, "headroom expected at 1.0 V");
        // Trajectory ends at the tuned point, one entry per step moved.
        let moved = ((report.v_before - report.v_after) / tp.limits.step).round() as usize;
        assert_eq!(report.trajectory.len(), moved);
        if let Some(last) = report.trajectory.last() {
            assert_eq!(last.voltage, report.v_after);
        }
        // Power is evaluated at the same hot temperature and clock.
        assert_eq!(report.power_before.f, report.f_core);
        assert_eq!(report.power_after.f, report.f_core);
        assert_eq!(report.power_before.t, report.power_after.t);
        assert!(report.power_after.total_w <= report.power_before.total_w);
        assert!(!report.clamped);
    }

    #[test]
    fn tune_is_idempotent_at_the_primary_operating_point() {
        // At 500 MHz (the operating point the slope is calibrated around) a
        // second pass at the same temperature moves at most one step.
        let sample = die(1.0, 1.8, device::defaults::D0);
        let pll = PllConfig::for_frequency(defaults::OSC_HZ, 500_000_000).unwrap();
        let tp = TuningParams::default();
        let mcfg = MeasurementConfig::default();
        let ap = ActivityParams::default();

        let boot = SupplyState::new(1.0, &tp.limits).unwrap();
        let cold = ThermalState::ambient(&sample.thermal);
        let (first, supply, hot) =
            tune_from(&sample, &pll, &tp, &mcfg, &ap, boot, cold).unwrap();
        let (second, _, _) = tune_from(&sample, &pll, &tp, &mcfg, &ap, supply, hot).unwrap();
        assert!(
            (second.v_after - first.v_after).abs() <= tp.limits.step + 1e-12,
            "second pass {} vs first {}",
            second.v_after,
            first.v_after
        );
        assert_eq!(second.f_core, first.f_core);
    }

    #[test]
    fn repeated_passes_converge_monotonically_for_conservative_slopes() {
        // Far below the calibration point the deliberately low slope makes
        // the first pass undershoot the full reduction, so a repeat pass can
        // take more than one step; the sequence must still descend
        // monotonically and settle within a few passes.
        let sample = die(1.0, 1.8, device::defaults::D0);
        let pll = PllConfig::for_frequency(defaults::OSC_HZ, 400_000_000).unwrap();
        let tp = TuningParams::default();
        let mcfg = MeasurementConfig::default();
        let ap = ActivityParams::default();

        let mut supply = SupplyState::new(1.0, &tp.limits).unwrap();
        let mut state = ThermalState::ambient(&sample.thermal);
        let mut voltages = Vec::new();
        for _ in 0..5 {
            let (report, s, t) =
                tune_from(&sample, &pll, &tp, &mcfg, &ap, supply, state).unwrap();
            voltages.push(report.v_after);
            supply = s;
            state = t;
        }
        assert!(voltages.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{voltages:?}");
        let settled = voltages[voltages.len() - 1];
        assert_eq!(voltages[voltages.len() - 2], settled, "converged by pass 4: {voltages:?}");
        // Settled point still carries real margin: the oscillator target
        // remains at or below what the die delivers there.
        let hot = warm_up(&sample, ThermalState::ambient(&sample.thermal), &mcfg, mcfg.virus_power);
        let f_o = measure_slowest_ro(&sample, settled, &hot, &mcfg).unwrap();
        let f_t = target_ro_frequency(read_core_frequency::<f64>(&pll).unwrap(), &tp);
        assert!(f_o >= f_t, "settled oscillator {f_o} must cover target {f_t}");
    }

    #[test]
    fn faster_die_tunes_lower_at_fixed_clock() {
        let pll = PllConfig::for_frequency(defaults::OSC_HZ, 500_000_000).unwrap();
        let tp = TuningParams::default();
        let mcfg = MeasurementConfig::default();
        let ap = ActivityParams::default();
        let slow = tune(&die(1.06, 1.8, device::defaults::D0), &pll, &tp, &mcfg, &ap).unwrap();
        let fast = tune(&die(0.94, 1.8, device::defaults::D0), &pll, &tp, &mcfg, &ap).unwrap();
        assert!(fast.v_after <= slow.v_after);
    }

    #[test]
    fn higher_clock_needs_at_least_as_much_voltage() {
        let sample = die(1.0, 1.8, device::defaults::D0);
        let tp = TuningParams::default();
        let mcfg = MeasurementConfig::default();
        let ap = ActivityParams::default();
        let at = |f: u64| {
            let pll = PllConfig::for_frequency(defaults::OSC_HZ, f).unwrap();
            tune(&sample, &pll, &tp, &mcfg, &ap).unwrap().v_after
        };
        assert!(at(400_000_000) <= at(500_000_000));
        assert!(at(300_000_000) <= at(400_000_000));
    }

    #[test]
    fn reference_slope_constant_is_order_of_magnitude_compatible() {
        // The production figure is volts per counter LSB; one LSB of an
        // 85 µs window is 1/85 µs ≈ 11.76 kHz.
        let per_hz = defaults::SV_REFERENCE_V_PER_COUNT * crate::measure::defaults::WINDOW;
        assert!(per_hz > 0.0);
        let ratio = defaults::S_V / per_hz;
        assert!(ratio > 0.1 && ratio < 10.0, "fitted {} vs reference {per_hz}", defaults::S_V);
    }
}
