//! Firmware-side measurement path.
//!
//! Models what tuning software on the part can actually observe: ring
//! oscillators gated into 16-bit hardware counters over a fixed window, wrap
//! detection, repeat averaging, and the power-virus warm-up that brings the
//! junction to its working temperature before anything is measured.

use rand::Rng;

use crate::device::{ro_frequency, thermal_step, ChipSample, ThermalState};
use crate::error::{Error, Result};
use crate::float::Real;

/// Measurement defaults.
pub mod defaults {
    /// Counter gate window, seconds. Long enough for resolution, short
    /// enough that the fastest plausible oscillator stays under 2^16 counts.
    pub const WINDOW: f64 = 85.0e-6;
    /// Windowed measurements averaged per oscillator.
    pub const REPEATS: u32 = 4;
    /// Power-virus warm-up duration, seconds.
    pub const WARMUP: f64 = 1.0;
    /// Dissipation of the warm-up workload, watts.
    pub const VIRUS_POWER: f64 = 1.0;
    /// Maximum thermal-integration sub-step, seconds.
    pub const MAX_SUBSTEP: f64 = 0.010;
    /// Junction temperature clamp, °C. The package cannot exceed this; the
    /// model saturates rather than extrapolating.
    pub const T_CLAMP: f64 = 125.0;
    /// Counter modulus (16-bit hardware counters).
    pub const COUNTER_MODULUS: u64 = 1 << 16;
}

/// How ring oscillators are sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementConfig<T = f64> {
    /// Counter gate window, seconds.
    pub window: T,
    /// Windows averaged per oscillator.
    pub repeats: u32,
    /// Warm-up duration before measuring, seconds.
    pub warmup: T,
    /// Warm-up workload dissipation, watts.
    pub virus_power: T,
}

impl<T: Real> Default for MeasurementConfig<T> {
    fn default() -> Self {
        MeasurementConfig {
            window: T::of(defaults::WINDOW),
            repeats: defaults::REPEATS,
            warmup: T::of(defaults::WARMUP),
            virus_power: T::of(defaults::VIRUS_POWER),
        }
    }
}

/// One gated counter reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterSample<T = f64> {
    /// Counter value when the gate opened.
    pub start_count: u16,
    /// Counter value when the gate closed.
    pub end_count: u16,
    /// Gate duration, seconds.
    pub window: T,
    /// True when the counter passed its modulus at least once during the
    /// window, making the reading ambiguous.
    pub wrapped: bool,
}

/// Runs the power virus for `cfg.warmup` seconds starting from `state`,
/// integrating the thermal model in sub-steps of at most 10 ms, and clamps
/// the result at the 125 °C junction limit.
pub fn warm_up<T: Real>(
    sample: &ChipSample<T>,
    state: ThermalState<T>,
    cfg: &MeasurementConfig<T>,
    virus_power: T,
) -> ThermalState<T> {
    if cfg.warmup <= T::zero() {
        return state;
    }
    let max_dt = T::of(defaults::MAX_SUBSTEP);
    let n = (cfg.warmup / max_dt).ceil().as_f64().max(1.0) as u32;
    let dt = cfg.warmup / T::of(f64::from(n));
    let mut s = state;
    for _ in 0..n {
        s = thermal_step(s, &sample.thermal, virus_power, dt);
    }
    let clamp = T::of(defaults::T_CLAMP);
    if s.temperature > clamp {
        s.temperature = clamp;
    }
    s
}

/// Gates an oscillator of true frequency `f_ro` into a 16-bit counter for
/// `window` seconds, starting from an arbitrary `start_count`.
///
/// The end count is modular; `wrapped` is set exactly when the window saw
/// 2^16 or more edges, i.e. when `round(f_ro · window) ≥ 65536`.
pub fn count_window<T: Real>(f_ro: T, window: T, start_count: u16) -> CounterSample<T> {
    window_sample(f_ro, window, start_count, 0)
}

/// [`count_window`] plus an additive count perturbation (quantization /
/// sampling noise), clamped at zero total counts.
fn window_sample<T: Real>(f_ro: T, window: T, start_count: u16, noise: i64) -> CounterSample<T> {
    debug_assert!(f_ro >= T::zero() && window > T::zero());
    let ideal = (f_ro * window).round().as_f64() as i64;
    let counts = (ideal + noise).max(0) as u64;
    let end = (u64::from(start_count) + counts) % defaults::COUNTER_MODULUS;
    CounterSample {
        start_count,
        end_count: end as u16,
        window,
        wrapped: counts >= defaults::COUNTER_MODULUS,
    }
}

/// Recovers frequency from a counter reading: modular count difference over
/// the window. A wrapped reading is unrecoverable and errors.
pub fn counts_to_frequency<T: Real>(s: &CounterSample<T>) -> Result<T> {
    if s.wrapped {
        return Err(Error::CounterOverflow { window_s: s.window.as_f64() });
    }
    let diff = (i64::from(s.end_count) - i64::from(s.start_count))
        .rem_euclid(defaults::COUNTER_MODULUS as i64);
    Ok(T::of(diff as f64) / s.window)
}

/// Measures the slowest ring oscillator the way firmware does: for each
/// oscillator, `cfg.repeats` gated windows are averaged; the minimum per-
/// oscillator average is returned. Deterministic (no noise).
pub fn measure_slowest_ro<T: Real>(
    sample: &ChipSample<T>,
    v: T,
    state: &ThermalState<T>,
    cfg: &MeasurementConfig<T>,
) -> Result<T> {
    measure_slowest_ro_with(sample, v, state, cfg, |_, _| 0)
}

/// [`measure_slowest_ro`] with ±1-count noise per window drawn from `rng`,
/// for studying repeat-averaging behavior.
pub fn measure_slowest_ro_noisy<T: Real, R: Rng>(
    sample: &ChipSample<T>,
    v: T,
    state: &ThermalState<T>,
    cfg: &MeasurementConfig<T>,
    rng: &mut R,
) -> Result<T> {
    measure_slowest_ro_with(sample, v, state, cfg, |_, _| rng.random_range(-1..=1))
}

fn measure_slowest_ro_with<T: Real>(
    sample: &ChipSample<T>,
    v: T,
    state: &ThermalState<T>,
    cfg: &MeasurementConfig<T>,
    mut noise: impl FnMut(usize, u32) -> i64,
) -> Result<T> {
    debug_assert!(cfg.repeats >= 1);
    let mut slowest: Option<T> = None;
    for (idx, ro) in sample.ros.iter().enumerate() {
        let f_true = ro_frequency(ro, sample, v, state.temperature)?;
        let mut acc = T::zero();
        for rep in 0..cfg.repeats {
            let s = window_sample(f_true, cfg.window, start_count(idx, rep), noise(idx, rep));
            acc += counts_to_frequency(&s)?;
        }
        let mean = acc / T::of(f64::from(cfg.repeats));
        slowest = Some(match slowest {
            Some(m) => m.min(mean),
            None => mean,
        });
    }
    slowest.ok_or(Error::Degenerate { what: "sample has no ring oscillators" })
}

/// Arbitrary but deterministic counter phase for a given oscillator/repeat,
/// so round-trips exercise many start offsets while output stays stable.
fn start_count(ro_idx: usize, rep: u32) -> u16 {
    let mix = 0x9E37u32.wrapping_mul(ro_idx as u32 * 8 + rep + 1);
    (mix & 0xFFFF) as u16
}
