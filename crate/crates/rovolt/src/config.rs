//! TOML configuration schema for the simulator and tuner.
//!
//! Every knob of the model lives here with a serde default, so an empty
//! file (or no file at all) yields the reference setup and a config only
//! needs to name what it changes. [`Config::validate`] cross-checks the
//! sections and reports offending fields by dotted path.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::device::{self, DelayParams, PopulationSpec, ThermalParams};
use crate::error::{Error, Result};
use crate::measure::{self, MeasurementConfig};
use crate::power::{self, ActivityParams};
use crate::tuner::{self, PllConfig, SupplyLimits, TuningParams};

/// Configuration defaults that belong to no model module.
pub mod defaults {
    /// Default generator seed. Chosen with the calibration scan so the
    /// stock nine-die population reproduces the reference voltage windows
    /// and passes every safety gate; see the calibrate binary.
    pub const SEED: u64 = 40;
}

/// Monte-Carlo population shape and spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSection {
    /// Dice drawn around the slow process center.
    pub n_slow: u32,
    /// Dice drawn around the typical process center.
    pub n_typical: u32,
    /// Dice drawn around the fast process center.
    pub n_fast: u32,
    /// Slow-bin delay-multiplier center.
    pub k_p_slow: f64,
    /// Typical-bin delay-multiplier center.
    pub k_p_typical: f64,
    /// Fast-bin delay-multiplier center.
    pub k_p_fast: f64,
    /// Within-bin standard deviation of the delay multiplier.
    pub k_p_sigma: f64,
    /// Lower bound of the per-oscillator mismatch factor.
    pub k_ro_min: f64,
    /// Upper bound of the per-oscillator mismatch factor.
    pub k_ro_max: f64,
    /// Lower bound of the hidden true core-to-oscillator ratio.
    pub s_real_min: f64,
    /// Upper bound of the hidden true core-to-oscillator ratio.
    pub s_real_max: f64,
    /// Inverters per ring oscillator.
    pub n_inverters: u32,
}

impl Default for PopulationSection {
    fn default() -> Self {
        PopulationSection {
            n_slow: device::defaults::N_PER_BIN,
            n_typical: device::defaults::N_PER_BIN,
            n_fast: device::defaults::N_PER_BIN,
            k_p_slow: device::defaults::K_P_SLOW,
            k_p_typical: device::defaults::K_P_TYPICAL,
            k_p_fast: device::defaults::K_P_FAST,
            k_p_sigma: device::defaults::K_P_SIGMA,
            k_ro_min: device::defaults::K_RO_MIN,
            k_ro_max: device::defaults::K_RO_MAX,
            s_real_min: device::defaults::S_REAL_MIN,
            s_real_max: device::defaults::S_REAL_MAX,
            n_inverters: device::defaults::N_INVERTERS,
        }
    }
}

/// Inverter delay model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelaySection {
    /// Nominal inverter delay at 1.0 V and the reference temperature, s.
    pub d0: f64,
    /// Threshold voltage, volts.
    pub v_th: f64,
    /// Velocity-saturation exponent.
    pub alpha_sat: f64,
    /// Linear temperature coefficient, 1/°C.
    pub kappa_t: f64,
    /// Temperature at which `d0` is quoted, °C.
    pub t_ref: f64,
}

impl Default for DelaySection {
    fn default() -> Self {
        DelaySection {
            d0: device::defaults::D0,
            v_th: device::defaults::V_TH,
            alpha_sat: device::defaults::ALPHA_SAT,
            kappa_t: device::defaults::KAPPA_T,
            t_ref: device::defaults::T_REF,
        }
    }
}

/// First-order package thermal model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalSection {
    /// Ambient temperature, °C.
    pub t_ambient: f64,
    /// Junction-to-ambient thermal resistance, °C/W.
    pub r_th: f64,
    /// Thermal time constant, seconds.
    pub tau: f64,
}

impl Default for ThermalSection {
    fn default() -> Self {
        ThermalSection {
            t_ambient: device::defaults::T_AMBIENT,
            r_th: device::defaults::R_TH,
            tau: device::defaults::TAU,
        }
    }
}

/// Switching activity and leakage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivitySection {
    /// Activity factor (fraction of capacitance switching per cycle).
    pub alpha: f64,
    /// Switched capacitance, farads.
    pub c_sw: f64,
    /// Leakage current at the reference temperature, amperes.
    pub i_leak0: f64,
    /// Exponential leakage temperature scale, °C.
    pub t_leak_scale: f64,
}

impl Default for ActivitySection {
    fn default() -> Self {
        ActivitySection {
            alpha: power::defaults::ALPHA,
            c_sw: power::defaults::C_SW,
            i_leak0: power::defaults::I_LEAK0,
            t_leak_scale: power::defaults::T_LEAK_SCALE,
        }
    }
}

/// Voltage regulator limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupplySection {
    /// Lowest programmable voltage, volts.
    pub v_min: f64,
    /// Highest programmable voltage, volts.
    pub v_max: f64,
    /// Regulator step, volts.
    pub step: f64,
    /// Slew rate, volts per microsecond.
    pub slew: f64,
    /// Boot voltage before the first tune, volts.
    pub v_nominal: f64,
}

impl Default for SupplySection {
    fn default() -> Self {
        SupplySection {
            v_min: tuner::defaults::V_MIN,
            v_max: tuner::defaults::V_MAX,
            step: tuner::defaults::STEP,
            slew: tuner::defaults::SLEW,
            v_nominal: tuner::defaults::V_NOMINAL,
        }
    }
}

/// Counter-window measurement settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasurementSection {
    /// Counter gate window, seconds.
    pub window: f64,
    /// Windows averaged per reading.
    pub repeats: u32,
    /// Power-virus warm-up before measuring, seconds.
    pub warmup: f64,
    /// Dissipated power during warm-up, watts.
    pub virus_power: f64,
}

impl Default for MeasurementSection {
    fn default() -> Self {
        MeasurementSection {
            window: measure::defaults::WINDOW,
            repeats: measure::defaults::REPEATS,
            warmup: measure::defaults::WARMUP,
            virus_power: measure::defaults::VIRUS_POWER,
        }
    }
}

/// Tuner constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningSection {
    /// Conservative core-to-oscillator frequency ratio.
    pub s_f: f64,
    /// Voltage-per-hertz slope of the linear predictor.
    pub s_v: f64,
    /// Additive voltage guard band, volts.
    pub guard_v: f64,
}

impl Default for TuningSection {
    fn default() -> Self {
        TuningSection {
            s_f: tuner::defaults::S_F,
            s_v: tuner::defaults::S_V,
            guard_v: tuner::defaults::GUARD_V,
        }
    }
}

/// Stress-test scoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StressSection {
    /// Relative margin separating a failure from a crash.
    pub g_fail: f64,
}

impl Default for StressSection {
    fn default() -> Self {
        StressSection { g_fail: device::defaults::G_FAIL }
    }
}

/// Clock generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PllSection {
    /// Reference oscillator, hertz.
    pub osc_hz: u64,
}

impl Default for PllSection {
    fn default() -> Self {
        PllSection { osc_hz: tuner::defaults::OSC_HZ }
    }
}

/// Complete run configuration. Every field has a default, so `""` parses
/// to the reference setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Population generator seed.
    pub seed: u64,
    /// Monte-Carlo population shape.
    pub population: PopulationSection,
    /// Inverter delay model.
    pub delay: DelaySection,
    /// Package thermal model.
    pub thermal: ThermalSection,
    /// Switching activity and leakage.
    pub activity: ActivitySection,
    /// Regulator limits.
    pub supply: SupplySection,
    /// Counter measurement settings.
    pub measurement: MeasurementSection,
    /// Tuner constants.
    pub tuning: TuningSection,
    /// Stress scoring.
    pub stress: StressSection,
    /// Clock generation.
    pub pll: PllSection,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: defaults::SEED,
            population: PopulationSection::default(),
            delay: DelaySection::default(),
            thermal: ThermalSection::default(),
            activity: ActivitySection::default(),
            supply: SupplySection::default(),
            measurement: MeasurementSection::default(),
            tuning: TuningSection::default(),
            stress: StressSection::default(),
            pll: PllSection::default(),
        }
    }
}

impl Config {
    /// Parses a TOML string and validates it.
    pub fn from_toml(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text)
            .map_err(|e| Error::InvalidConfig { field: "<toml>", reason: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, parses, and validates a TOML file.
    pub fn load(path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path).map_err(|e| Error::InvalidConfig {
            field: "<file>",
            reason: format!("{}: {e}", path.display()),
        })?;
        Config::from_toml(&text)
    }

    /// Cross-checks all sections; names the first offending field.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: String| Err(Error::InvalidConfig { field, reason });

        // Population.
        let p = &self.population;
        if p.n_slow + p.n_typical + p.n_fast == 0 {
            return bad("population.n_slow", "population must contain at least one die".into());
        }
        if !(p.k_p_sigma >= 0.0) {
            return bad("population.k_p_sigma", format!("{} must be >= 0", p.k_p_sigma));
        }
        for (field, center) in [
            ("population.k_p_slow", p.k_p_slow),
            ("population.k_p_typical", p.k_p_typical),
            ("population.k_p_fast", p.k_p_fast),
        ] {
            let (lo, hi) = (device::defaults::K_P_MIN, device::defaults::K_P_MAX);
            if !(center - 3.0 * p.k_p_sigma >= lo && center + 3.0 * p.k_p_sigma <= hi) {
                return bad(
                    field,
                    format!("{center} ± 3σ must stay within the process band [{lo}, {hi}]"),
                );
            }
        }
        if !(p.k_ro_min >= 1.0) {
            return bad(
                "population.k_ro_min",
                format!("{} must be >= 1 (sensors never beat the core path)", p.k_ro_min),
            );
        }
        if !(p.k_ro_max >= p.k_ro_min) {
            return bad("population.k_ro_max", format!("{} < k_ro_min {}", p.k_ro_max, p.k_ro_min));
        }
        if !(p.s_real_min > 1.0) {
            return bad("population.s_real_min", format!("{} must exceed 1", p.s_real_min));
        }
        if !(p.s_real_max >= p.s_real_min) {
            return bad(
                "population.s_real_max",
                format!("{} < s_real_min {}", p.s_real_max, p.s_real_min),
            );
        }
        if p.n_inverters == 0 {
            return bad("population.n_inverters", "must be >= 1".into());
        }

        // Delay model.
        let d = &self.delay;
        if !(d.d0 > 0.0) {
            return bad("delay.d0", format!("{} must be > 0", d.d0));
        }
        if !(d.v_th > 0.0 && d.v_th < 1.0) {
            return bad("delay.v_th", format!("{} must lie in (0, 1)", d.v_th));
        }
        if !(d.alpha_sat > 0.0) {
            return bad("delay.alpha_sat", format!("{} must be > 0", d.alpha_sat));
        }
        if !(d.kappa_t >= 0.0) {
            return bad("delay.kappa_t", format!("{} must be >= 0", d.kappa_t));
        }

        // Thermal.
        let th = &self.thermal;
        if !(th.r_th > 0.0) {
            return bad("thermal.r_th", format!("{} must be > 0", th.r_th));
        }
        if !(th.tau > 0.0) {
            return bad("thermal.tau", format!("{} must be > 0", th.tau));
        }

        // Activity.
        let a = &self.activity;
        if !(a.alpha > 0.0 && a.alpha <= 1.0) {
            return bad("activity.alpha", format!("{} must lie in (0, 1]", a.alpha));
        }
        if !(a.c_sw > 0.0) {
            return bad("activity.c_sw", format!("{} must be > 0", a.c_sw));
        }
        if !(a.i_leak0 >= 0.0) {
            return bad("activity.i_leak0", format!("{} must be >= 0", a.i_leak0));
        }
        if !(a.t_leak_scale > 0.0) {
            return bad("activity.t_leak_scale", format!("{} must be > 0", a.t_leak_scale));
        }

        // Supply.
        let s = &self.supply;
        if !(s.step > 0.0) {
            return bad("supply.step", format!("{} must be > 0", s.step));
        }
        if !(s.slew > 0.0) {
            return bad("supply.slew", format!("{} must be > 0", s.slew));
        }
        if !(s.v_min < s.v_max) {
            return bad("supply.v_min", format!("{} must be below v_max {}", s.v_min, s.v_max));
        }
        if s.v_min < device::defaults::STRESS_V_MIN - 1e-12 {
            return bad(
                "supply.v_min",
                format!("{} below the characterized range floor {}", s.v_min, device::defaults::STRESS_V_MIN),
            );
        }
        if s.v_max > device::defaults::STRESS_V_MAX + 1e-12 {
            return bad(
                "supply.v_max",
                format!("{} above the characterized range ceiling {}", s.v_max, device::defaults::STRESS_V_MAX),
            );
        }
        let limits = self.supply_limits();
        for (field, v) in [
            ("supply.v_min", s.v_min),
            ("supply.v_max", s.v_max),
            ("supply.v_nominal", s.v_nominal),
        ] {
            if !limits.is_on_grid(v) {
                return bad(field, format!("{v} is not a multiple of step {}", s.step));
            }
        }
        if !(s.v_nominal >= s.v_min && s.v_nominal <= s.v_max) {
            return bad(
                "supply.v_nominal",
                format!("{} outside [{}, {}]", s.v_nominal, s.v_min, s.v_max),
            );
        }
        if s.v_min <= d.v_th + device::defaults::VALIDITY_MARGIN {
            return bad(
                "supply.v_min",
                format!("{} not above the delay-model floor {}", s.v_min, d.v_th + device::defaults::VALIDITY_MARGIN),
            );
        }

        // Measurement.
        let m = &self.measurement;
        if !(m.window > 0.0) {
            return bad("measurement.window", format!("{} must be > 0", m.window));
        }
        if m.repeats == 0 {
            return bad("measurement.repeats", "must average at least one window".into());
        }
        if !(m.warmup >= 0.0) {
            return bad("measurement.warmup", format!("{} must be >= 0", m.warmup));
        }
        if !(m.virus_power >= 0.0) {
            return bad("measurement.virus_power", format!("{} must be >= 0", m.virus_power));
        }
        // Counter headroom: the fastest plausible oscillator — process floor,
        // no mismatch, cold die — must not wrap the 16-bit counter, even
        // with one count of jitter.
        let fastest_delay = d.d0
            * device::defaults::K_P_MIN
            * p.k_ro_min
            * ((1.0 - d.v_th) / (s.v_max - d.v_th)).powf(d.alpha_sat)
            * (1.0 + d.kappa_t * (th.t_ambient - d.t_ref));
        let f_worst = 1.0 / (f64::from(p.n_inverters) * 2.0 * fastest_delay);
        let counts = (m.window * f_worst).round() + 1.0;
        if counts >= measure::defaults::COUNTER_MODULUS as f64 {
            return bad(
                "measurement.window",
                format!(
                    "{} s gates {counts:.0} counts at the fastest corner ({:.3e} Hz); the 16-bit counter wraps",
                    m.window, f_worst
                ),
            );
        }

        // Tuning.
        let t = &self.tuning;
        if !(t.s_f > 1.0) {
            return bad("tuning.s_f", format!("{} must exceed 1", t.s_f));
        }
        if !(t.s_f < p.s_real_min) {
            return bad(
                "tuning.s_f",
                format!("{} must stay below the weakest hidden ratio {}", t.s_f, p.s_real_min),
            );
        }
        if !(t.s_v > 0.0) {
            return bad("tuning.s_v", format!("{} must be > 0", t.s_v));
        }
        if !(t.guard_v >= 0.0) {
            return bad("tuning.guard_v", format!("{} must be >= 0", t.guard_v));
        }

        // Stress.
        if !(self.stress.g_fail >= 0.0 && self.stress.g_fail < 1.0) {
            return bad("stress.g_fail", format!("{} must lie in [0, 1)", self.stress.g_fail));
        }

        // PLL.
        if self.pll.osc_hz == 0 {
            return bad("pll.osc_hz", "reference oscillator must not be zero".into());
        }
        Ok(())
    }

    /// Delay parameters of the configured process.
    pub fn delay_params(&self) -> DelayParams<f64> {
        DelayParams {
            d0: self.delay.d0,
            v_th: self.delay.v_th,
            alpha_sat: self.delay.alpha_sat,
            kappa_t: self.delay.kappa_t,
            t_ref: self.delay.t_ref,
        }
    }

    /// Thermal parameters of the configured package.
    pub fn thermal_params(&self) -> ThermalParams<f64> {
        ThermalParams {
            t_ambient: self.thermal.t_ambient,
            r_th: self.thermal.r_th,
            tau: self.thermal.tau,
        }
    }

    /// Activity/leakage parameters.
    pub fn activity_params(&self) -> ActivityParams<f64> {
        ActivityParams {
            alpha: self.activity.alpha,
            c_sw: self.activity.c_sw,
            i_leak0: self.activity.i_leak0,
            t_leak_scale: self.activity.t_leak_scale,
        }
    }

    /// Regulator limits.
    pub fn supply_limits(&self) -> SupplyLimits<f64> {
        SupplyLimits {
            v_min: self.supply.v_min,
            v_max: self.supply.v_max,
            step: self.supply.step,
            slew: self.supply.slew,
        }
    }

    /// Tuner parameters (limits included).
    pub fn tuning_params(&self) -> TuningParams<f64> {
        TuningParams {
            s_f: self.tuning.s_f,
            s_v: self.tuning.s_v,
            guard_v: self.tuning.guard_v,
            limits: self.supply_limits(),
        }
    }

    /// Measurement settings.
    pub fn measurement_config(&self) -> MeasurementConfig<f64> {
        MeasurementConfig {
            window: self.measurement.window,
            repeats: self.measurement.repeats,
            warmup: self.measurement.warmup,
            virus_power: self.measurement.virus_power,
        }
    }

    /// Population generator spec (leakage and capacitance come from
    /// `[activity]`, the single source for those quantities).
    pub fn population_spec(&self) -> PopulationSpec {
        let p = &self.population;
        PopulationSpec {
            n_slow: p.n_slow,
            n_typical: p.n_typical,
            n_fast: p.n_fast,
            k_p_centers: [p.k_p_slow, p.k_p_typical, p.k_p_fast],
            k_p_sigma: p.k_p_sigma,
            k_ro_min: p.k_ro_min,
            k_ro_max: p.k_ro_max,
            s_real_min: p.s_real_min,
            s_real_max: p.s_real_max,
            n_inverters: p.n_inverters,
            delay: self.delay_params(),
            thermal: self.thermal_params(),
            i_leak0: self.activity.i_leak0,
            c_sw: self.activity.c_sw,
        }
    }

    /// PLL setting for a core frequency, from the configured reference.
    pub fn pll_for(&self, f_hz: u64) -> Result<PllConfig> {
        PllConfig::for_frequency(self.pll.osc_hz, f_hz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_is_the_default_config() {
        let cfg = Config::from_toml("").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.seed, defaults::SEED);
        assert_eq!(cfg.tuning.s_f, 1.7);
        assert_eq!(cfg.supply.step, 0.010);
    }

    #[test]
    fn default_config_validates() {
        Config::default().validate().unwrap();
    }

    #[test]
    fn serialize_parse_roundtrip_is_identity() {
        let cfg = Config::default();
        let text = toml::to_string(&cfg).unwrap();
        let back = Config::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_toml_overrides_only_named_fields() {
        let cfg = Config::from_toml(
            "seed = 99\n\n[tuning]\ns_v = 2.5e-9\n\n[population]\nn_fast = 100\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.tuning.s_v, 2.5e-9);
        assert_eq!(cfg.tuning.s_f, 1.7); // untouched
        assert_eq!(cfg.population.n_fast, 100);
        assert_eq!(cfg.population.n_slow, 3); // untouched
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(Config::from_toml("typo_field = 1\n").is_err());
        assert!(Config::from_toml("[tuning]\ns_phi = 1.0\n").is_err());
    }

    #[test]
    fn validation_names_the_offending_field() {
        let cases: &[(&str, &str)] = &[
            ("[supply]\nv_min = 0.6033\n", "supply.v_min"),
            ("[supply]\nv_nominal = 1.41\n", "supply.v_nominal"),
            ("[tuning]\ns_f = 1.8\n", "tuning.s_f"),
            ("[tuning]\ns_f = 0.5\n", "tuning.s_f"),
            ("[tuning]\ns_v = -1e-9\n", "tuning.s_v"),
            ("[measurement]\nrepeats = 0\n", "measurement.repeats"),
            ("[measurement]\nwindow = 1.0\n", "measurement.window"),
            ("[population]\nk_p_sigma = -0.01\n", "population.k_p_sigma"),
            ("[population]\nk_p_fast = 0.91\n", "population.k_p_fast"),
            ("[population]\nk_ro_min = 0.99\n", "population.k_ro_min"),
            ("[stress]\ng_fail = 1.5\n", "stress.g_fail"),
            ("[delay]\nv_th = 0.0\n", "delay.v_th"),
            ("[thermal]\ntau = 0.0\n", "thermal.tau"),
            ("[pll]\nosc_hz = 0\n", "pll.osc_hz"),
        ];
        for (text, field) in cases {
            match Config::from_toml(text) {
                Err(Error::InvalidConfig { field: f, .. }) => {
                    assert_eq!(&f, field, "wrong field for {text:?}");
                }
                other => panic!("expected InvalidConfig({field}) for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn v_nominal_outside_range_is_rejected() {
        // In-grid but above a lowered ceiling.
        let err = Config::from_toml("[supply]\nv_max = 0.9\n").unwrap_err();
        match err {
            Error::InvalidConfig { field, .. } => assert_eq!(field, "supply.v_nominal"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn conversions_carry_the_configured_values() {
        let cfg = Config::from_toml(
            "[delay]\nd0 = 4.0e-11\n\n[activity]\nc_sw = 6.0e-10\n\n[supply]\nstep = 0.005\n",
        )
        .unwrap();
        let spec = cfg.population_spec();
        assert_eq!(spec.delay.d0, 4.0e-11);
        assert_eq!(spec.c_sw, 6.0e-10);
        assert_eq!(spec.k_p_centers, [1.06, 1.00, 0.94]);
        let tp = cfg.tuning_params();
        assert_eq!(tp.limits.step, 0.005);
        assert_eq!(tp.s_f, 1.7);
        let pll = cfg.pll_for(500_000_000).unwrap();
        assert_eq!(pll.osc_hz, 25_000_000);
    }

    #[test]
    fn load_reads_a_file_and_reports_missing_ones() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "seed = 7\n").unwrap();
        let cfg = Config::load(&path).unwrap();
        assert_eq!(cfg.seed, 7);

        let missing = dir.path().join("absent.toml");
        assert!(matches!(Config::load(&missing), Err(Error::InvalidConfig { field: "<file>", .. })));
    }

    #[test]
    fn malformed_toml_is_reported_as_config_error() {
        assert!(matches!(
            Config::from_toml("seed = \"not a number\""),
            Err(Error::InvalidConfig { field: "<toml>", .. })
        ));
    }
}
