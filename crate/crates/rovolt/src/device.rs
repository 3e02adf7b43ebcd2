//! Silicon device model.
//!
//! Everything the rest of the workspace treats as "the hardware" lives here:
//! alpha-power-law inverter delay, ring-oscillator frequencies, the hidden
//! maximum safe core frequency, first-order thermal dynamics, the stress-test
//! ground truth, and Monte-Carlo die populations.
//!
//! The tuner and characterization layers never read `s_real` or
//! [`max_safe_frequency`] directly; they only see ring-oscillator counts and
//! stress outcomes, exactly like software running on a real part.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::float::Real;

/// Model and population defaults, shared by `Default` impls and the config
/// layer so there is a single source of truth for every constant.
pub mod defaults {
    /// Base stage delay at 1.0 V and `T_REF`, seconds. Calibrated so a
    /// typical die's slowest ring oscillator lands near 390 MHz hot, which
    /// puts 500 MHz operation at the documented 70–140 mV tuning headroom.
    pub const D0: f64 = 3.90e-11;
    /// Threshold voltage, volts.
    pub const V_TH: f64 = 0.35;
    /// Velocity-saturation exponent (alpha-power law).
    pub const ALPHA_SAT: f64 = 1.3;
    /// Fractional delay increase per °C above `T_REF`.
    pub const KAPPA_T: f64 = 8.0e-4;
    /// Reference temperature, °C.
    pub const T_REF: f64 = 25.0;
    /// Voltage margin above `v_th` below which the delay model is invalid.
    pub const VALIDITY_MARGIN: f64 = 0.05;

    /// Stages per ring oscillator (odd).
    pub const N_INVERTERS: u32 = 31;

    /// Ambient temperature, °C.
    pub const T_AMBIENT: f64 = 25.0;
    /// Junction-to-ambient thermal resistance, °C/W.
    pub const R_TH: f64 = 40.0;
    /// First-order thermal time constant, seconds.
    pub const TAU: f64 = 0.2;

    /// Absolute supply range of the regulator hardware, volts. Stress tests
    /// outside this range are meaningless and rejected.
    pub const STRESS_V_MIN: f64 = 0.6;
    /// See [`STRESS_V_MIN`].
    pub const STRESS_V_MAX: f64 = 1.3;
    /// Default stress-test margin separating Failure from Success: the die
    /// must sustain the clock with 2% headroom to count as a clean pass.
    pub const G_FAIL: f64 = 0.02;

    /// Process-bin centers for the `k_p` multiplier: slow, typical, fast.
    pub const K_P_SLOW: f64 = 1.06;
    /// See [`K_P_SLOW`].
    pub const K_P_TYPICAL: f64 = 1.00;
    /// See [`K_P_SLOW`].
    pub const K_P_FAST: f64 = 0.94;
    /// Within-bin jitter sigma for `k_p` (truncated at ±3 sigma).
    pub const K_P_SIGMA: f64 = 0.01;
    /// Hard range for `k_p` regardless of bin.
    pub const K_P_MIN: f64 = 0.9;
    /// See [`K_P_MIN`].
    pub const K_P_MAX: f64 = 1.1;
    /// Per-oscillator spread multiplier range (1 = fastest replica).
    pub const K_RO_MIN: f64 = 1.0;
    /// Upper end of the generated `k_ro` range. The type invariant allows up
    /// to 1.05; generation stays inside it.
    pub const K_RO_MAX: f64 = 1.04;
    /// True silicon-speed ratio range: max safe core clock over slowest RO.
    pub const S_REAL_MIN: f64 = 1.75;
    /// See [`S_REAL_MIN`].
    pub const S_REAL_MAX: f64 = 1.90;

    /// Default bin sizes: three slow, three typical, three fast dice.
    pub const N_PER_BIN: u32 = 3;
}

/// Alpha-power-law delay parameters for one inverter stage.
///
/// `d0` is the stage delay at 1.0 V supply and `t_ref`, before process
/// (`k_p`) and per-oscillator (`k_ro`) multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayParams<T = f64> {
    /// Base stage delay, seconds.
    pub d0: T,
    /// Threshold voltage, volts.
    pub v_th: T,
    /// Velocity-saturation exponent, dimensionless.
    pub alpha_sat: T,
    /// Fractional delay increase per °C above `t_ref`.
    pub kappa_t: T,
    /// Reference temperature, °C.
    pub t_ref: T,
}

impl<T: Real> Default for DelayParams<T> {
    fn default() -> Self {
        DelayParams {
            d0: T::of(defaults::D0),
            v_th: T::of(defaults::V_TH),
            alpha_sat: T::of(defaults::ALPHA_SAT),
            kappa_t: T::of(defaults::KAPPA_T),
            t_ref: T::of(defaults::T_REF),
        }
    }
}

impl<T: Real> DelayParams<T> {
    /// Lowest supply voltage at which the model is meaningful.
    pub fn validity_floor(&self) -> T {
        self.v_th + T::of(defaults::VALIDITY_MARGIN)
    }
}

/// Ring-oscillator implementation flavor. Two kinds are placed on die so the
/// speed sensors bracket different gate styles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoKind {
    /// Plain inverter chain.
    Inverter,
    /// NAND-gate chain (one input tied off).
    Nand,
}

/// Where on the die the oscillator sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoLocation {
    /// Inside the core logic region.
    Core,
    /// In the I/O periphery.
    Io,
}

/// The four (kind, location) slots every generated die populates.
pub const RO_SLOTS: [(RoKind, RoLocation); 4] = [
    (RoKind::Inverter, RoLocation::Core),
    (RoKind::Inverter, RoLocation::Io),
    (RoKind::Nand, RoLocation::Core),
    (RoKind::Nand, RoLocation::Io),
];

/// One on-die ring oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingOscillator<T = f64> {
    /// Implementation flavor.
    pub kind: RoKind,
    /// Placement.
    pub location: RoLocation,
    /// Stage count; odd and ≥ 3.
    pub n_inverters: u32,
    /// Within-die speed multiplier; ≥ 1 means slower than the die baseline,
    /// legal range 1.0–1.05.
    pub k_ro: T,
}

/// Process-speed bin a die was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpeedBin {
    /// High `k_p`: slow silicon.
    Slow,
    /// Nominal `k_p`.
    Typical,
    /// Low `k_p`: fast silicon.
    Fast,
}

impl core::fmt::Display for SpeedBin {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            SpeedBin::Slow => "slow",
            SpeedBin::Typical => "typical",
            SpeedBin::Fast => "fast",
        })
    }
}

/// First-order thermal model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams<T = f64> {
    /// Ambient temperature, °C.
    pub t_ambient: T,
    /// Junction-to-ambient thermal resistance, °C/W.
    pub r_th: T,
    /// Time constant, seconds.
    pub tau: T,
}

impl<T: Real> Default for ThermalParams<T> {
    fn default() -> Self {
        ThermalParams {
            t_ambient: T::of(defaults::T_AMBIENT),
            r_th: T::of(defaults::R_TH),
            tau: T::of(defaults::TAU),
        }
    }
}

/// Junction temperature plus the simulation clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState<T = f64> {
    /// Junction temperature, °C.
    pub temperature: T,
    /// Simulation time, seconds.
    pub time: T,
}

impl<T: Real> ThermalState<T> {
    /// State of a cold part: ambient temperature at time zero.
    pub fn ambient(tp: &ThermalParams<T>) -> Self {
        ThermalState { temperature: tp.t_ambient, time: T::zero() }
    }
}

/// Result of one stress-test run. Variants are ordered worst-to-best so that
/// the monotone outcome-vs-voltage property can use plain comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StressOutcome {
    /// Timing margin below 1: the part locks up or corrupts state.
    Crash,
    /// Margin ≥ 1 but inside the failure guard band: errors detected during
    /// execution.
    Failure,
    /// Clean completion with full guard margin.
    Success,
}

impl core::fmt::Display for StressOutcome {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            StressOutcome::Success => "success",
            StressOutcome::Failure => "failure",
            StressOutcome::Crash => "crash",
        })
    }
}

/// One simulated die.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipSample<T = f64> {
    /// Stable identifier (generation order).
    pub id: u32,
    /// Bin the die was drawn from.
    pub bin: SpeedBin,
    /// Process speed multiplier; > 1 = slower die. Legal range 0.9–1.1.
    pub k_p: T,
    /// On-die ring oscillators. Generated dice always carry the four
    /// [`RO_SLOTS`]; test fixtures may carry fewer.
    pub ros: Vec<RingOscillator<T>>,
    /// Hidden truth: max safe core frequency = `s_real` × slowest RO
    /// frequency. Always above the characterization ratio in generated
    /// populations; that gap is what makes linear tuning conservative.
    pub s_real: T,
    /// Thermal parameters of the package.
    pub thermal: ThermalParams<T>,
    /// Stage-delay parameters.
    pub delay: DelayParams<T>,
    /// Leakage current at `t_ref`, amperes.
    pub i_leak0: T,
    /// Switched capacitance, farads.
    pub c_sw: T,
}

/// Everything [`generate_population`] needs. Values are `f64` because draws
/// always happen in `f64` and narrow into the working scalar afterwards,
/// keeping populations identical across scalar choices.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    /// Dice in the slow bin.
    pub n_slow: u32,
    /// Dice in the typical bin.
    pub n_typical: u32,
    /// Dice in the fast bin.
    pub n_fast: u32,
    /// `k_p` bin centers: slow, typical, fast.
    pub k_p_centers: [f64; 3],
    /// Within-bin `k_p` jitter sigma (draws truncated at ±3 sigma).
    pub k_p_sigma: f64,
    /// Per-oscillator multiplier range (uniform).
    pub k_ro_min: f64,
    /// See `k_ro_min`.
    pub k_ro_max: f64,
    /// True speed-ratio range (uniform).
    pub s_real_min: f64,
    /// See `s_real_min`.
    pub s_real_max: f64,
    /// Stages per ring oscillator.
    pub n_inverters: u32,
    /// Shared stage-delay parameters (per-die `k_p` carries the variation).
    pub delay: DelayParams<f64>,
    /// Shared package thermal parameters.
    pub thermal: ThermalParams<f64>,
    /// Leakage current at reference temperature, amperes.
    pub i_leak0: f64,
    /// Switched capacitance, farads.
    pub c_sw: f64,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        PopulationSpec {
            n_slow: defaults::N_PER_BIN,
            n_typical: defaults::N_PER_BIN,
            n_fast: defaults::N_PER_BIN,
            k_p_centers: [defaults::K_P_SLOW, defaults::K_P_TYPICAL, defaults::K_P_FAST],
            k_p_sigma: defaults::K_P_SIGMA,
            k_ro_min: defaults::K_RO_MIN,
            k_ro_max: defaults::K_RO_MAX,
            s_real_min: defaults::S_REAL_MIN,
            s_real_max: defaults::S_REAL_MAX,
            n_inverters: defaults::N_INVERTERS,
            delay: DelayParams::default(),
            thermal: ThermalParams::default(),
            i_leak0: crate::power::defaults::I_LEAK0,
            c_sw: crate::power::defaults::C_SW,
        }
    }
}

impl PopulationSpec {
    /// Total number of dice this spec generates.
    pub fn total(&self) -> u32 {
        self.n_slow + self.n_typical + self.n_fast
    }
}

/// Propagation delay of one inverter stage, seconds.
///
/// `d0 · k_p · k_ro · [(1 − v_th)^alpha / (v − v_th)^alpha] · (1 + kappa_t·(t − t_ref))`
/// with the nominal supply fixed at 1.0 V. Strictly decreasing in `v`,
/// strictly increasing in `t`, `k_p`, and `k_ro`.
///
/// Errors with [`Error::VoltageBelowFloor`] at or below `v_th + 0.05`, where
/// the power law diverges.
pub fn inverter_delay<T: Real>(
    dp: &DelayParams<T>,
    k_p: T,
    k_ro: T,
    v: T,
    t: T,
) -> Result<T> {
    let floor = dp.validity_floor();
    if v <= floor {
        return Err(Error::VoltageBelowFloor { v: v.as_f64(), floor: floor.as_f64() });
    }
    let v_nom = T::one();
    let drive = ((v_nom - dp.v_th) / (v - dp.v_th)).powf(dp.alpha_sat);
    let thermal = T::one() + dp.kappa_t * (t - dp.t_ref);
    Ok(dp.d0 * k_p * k_ro * drive * thermal)
}

/// Oscillation frequency of one ring oscillator on a given die, hertz.
///
/// A cycle is two traversals of the `n_inverters` chain:
/// `1 / (n · 2 · inverter_delay)`.
pub fn ro_frequency<T: Real>(
    ro: &RingOscillator<T>,
    sample: &ChipSample<T>,
    v: T,
    t: T,
) -> Result<T> {
    let d = inverter_delay(&sample.delay, sample.k_p, ro.k_ro, v, t)?;
    Ok((T::of(f64::from(ro.n_inverters)) * T::of(2.0) * d).recip())
}

/// Noise-free minimum across the die's ring oscillators, hertz.
///
/// This is ground truth; the measured counterpart (counter windows,
/// quantization) lives in the measurement module.
pub fn slowest_true_ro<T: Real>(sample: &ChipSample<T>, v: T, t: T) -> Result<T> {
    let mut slowest: Option<T> = None;
    for ro in &sample.ros {
        let f = ro_frequency(ro, sample, v, t)?;
        slowest = Some(match slowest {
            Some(s) => s.min(f),
            None => f,
        });
    }
    slowest.ok_or(Error::Degenerate { what: "sample has no ring oscillators" })
}

/// Hidden maximum safe core frequency: `s_real × slowest_true_ro`, hertz.
///
/// The tuner never reads this; only the stress test consults it.
pub fn max_safe_frequency<T: Real>(sample: &ChipSample<T>, v: T, t: T) -> Result<T> {
    Ok(sample.s_real * slowest_true_ro(sample, v, t)?)
}

/// Advances junction temperature by `dt` seconds at constant dissipated
/// `power`, relaxing exponentially toward `t_ambient + power·r_th`.
pub fn thermal_step<T: Real>(
    state: ThermalState<T>,
    tp: &ThermalParams<T>,
    power: T,
    dt: T,
) -> ThermalState<T> {
    let target = tp.t_ambient + power * tp.r_th;
    let decay = T::one() - (-dt / tp.tau).exp();
    ThermalState {
        temperature: state.temperature + (target - state.temperature) * decay,
        time: state.time + dt,
    }
}

/// Runs the stress oracle at an operating point.
///
/// With margin `m = max_safe_frequency / f_core`: Crash below 1, Failure
/// inside the `g_fail` guard band, Success at or above `1 + g_fail`.
/// Rejects voltages outside the regulator's absolute 0.6–1.3 V range.
pub fn run_stress_test<T: Real>(
    sample: &ChipSample<T>,
    v: T,
    f_core: T,
    t: T,
    g_fail: T,
) -> Result<StressOutcome> {
    if v < T::of(defaults::STRESS_V_MIN) || v > T::of(defaults::STRESS_V_MAX) {
        return Err(Error::VoltageOutOfRange {
            v: v.as_f64(),
            v_min: defaults::STRESS_V_MIN,
            v_max: defaults::STRESS_V_MAX,
        });
    }
    let m = max_safe_frequency(sample, v, t)? / f_core;
    Ok(if m < T::one() {
        StressOutcome::Crash
    } else if m < T::one() + g_fail {
        StressOutcome::Failure
    } else {
        StressOutcome::Success
    })
}

/// Draws a deterministic die population.
///
/// Draw order per die — `k_p` (truncated normal), then the four `k_ro`
/// values in [`RO_SLOTS`] order, then `s_real` — is part of this crate's
/// determinism contract; changing it changes every seeded population.
/// All draws are `f64` (ChaCha8 keyed by `seed`) and narrow to `T` last.
pub fn generate_population<T: Real>(spec: &PopulationSpec, seed: u64) -> Vec<ChipSample<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(spec.total() as usize);
    let bins = [
        (SpeedBin::Slow, spec.n_slow, spec.k_p_centers[0]),
        (SpeedBin::Typical, spec.n_typical, spec.k_p_centers[1]),
        (SpeedBin::Fast, spec.n_fast, spec.k_p_centers[2]),
    ];
    let mut id = 0u32;
    for (bin, count, center) in bins {
        for _ in 0..count {
            let k_p = truncated_normal(&mut rng, center, spec.k_p_sigma)
                .clamp(defaults::K_P_MIN, defaults::K_P_MAX);
            let ros: Vec<RingOscillator<T>> = RO_SLOTS
                .iter()
                .map(|&(kind, location)| RingOscillator {
                    kind,
                    location,
                    n_inverters: spec.n_inverters,
                    k_ro: T::of(rng.random_range(spec.k_ro_min..=spec.k_ro_max)),
                })
                .collect();
            let s_real = rng.random_range(spec.s_real_min..=spec.s_real_max);
            out.push(ChipSample {
                id,
                bin,
                k_p: T::of(k_p),
                ros,
                s_real: T::of(s_real),
                thermal: ThermalParams {
                    t_ambient: T::of(spec.thermal.t_ambient),
                    r_th: T::of(spec.thermal.r_th),
                    tau: T::of(spec.thermal.tau),
                },
                delay: DelayParams {
                    d0: T::of(spec.delay.d0),
                    v_th: T::of(spec.delay.v_th),
                    alpha_sat: T::of(spec.delay.alpha_sat),
                    kappa_t: T::of(spec.delay.kappa_t),
                    t_ref: T::of(spec.delay.t_ref),
                },
                i_leak0: T::of(spec.i_leak0),
                c_sw: T::of(spec.c_sw),
            });
            id += 1;
        }
    }
    out
}

/// Normal draw truncated at ±3 sigma (rejection sampling in `f64`).
fn truncated_normal(rng: &mut ChaCha8Rng, center: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return center;
    }
    let dist = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    loop {
        let d = dist.sample(rng);
        if d.abs() <= 3.0 * sigma {
            return center + d;
        }
    }
}
