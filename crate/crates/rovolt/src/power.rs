//! CMOS power model: leakage, static and dynamic dissipation, and the
//! voltage-ratio bookkeeping used to report savings.

use crate::device;
use crate::float::Real;

/// Power-model defaults.
pub mod defaults {
    /// Activity factor: proportion of switched capacitance toggling per
    /// cycle. 0.5 models the all-cores busy workload used for tuning.
    pub const ALPHA: f64 = 0.5;
    /// Switched capacitance, farads.
    pub const C_SW: f64 = 5.0e-10;
    /// Leakage current at the reference temperature, amperes.
    pub const I_LEAK0: f64 = 9.2e-3;
    /// Exponential temperature scale of leakage, °C.
    pub const T_LEAK_SCALE: f64 = 40.0;
}

/// Workload-dependent power parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityParams<T = f64> {
    /// Activity factor, 0–1.
    pub alpha: T,
    /// Switched capacitance, farads.
    pub c_sw: T,
    /// Leakage current at the reference temperature, amperes.
    pub i_leak0: T,
    /// Exponential temperature scale of leakage, °C.
    pub t_leak_scale: T,
}

impl<T: Real> Default for ActivityParams<T> {
    fn default() -> Self {
        ActivityParams {
            alpha: T::of(defaults::ALPHA),
            c_sw: T::of(defaults::C_SW),
            i_leak0: T::of(defaults::I_LEAK0),
            t_leak_scale: T::of(defaults::T_LEAK_SCALE),
        }
    }
}

/// Static/dynamic split of total power at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBreakdown<T = f64> {
    /// Leakage (static) power, watts.
    pub static_w: T,
    /// Switching (dynamic) power, watts.
    pub dynamic_w: T,
    /// Sum of the two, watts.
    pub total_w: T,
    /// Supply voltage at the point, volts.
    pub v: T,
    /// Core clock at the point, hertz.
    pub f: T,
    /// Junction temperature at the point, °C.
    pub t: T,
}

/// Leakage current at junction temperature `t`, amperes:
/// `i_leak0 · exp((t − 25) / t_leak_scale)`.
pub fn leakage_current<T: Real>(ap: &ActivityParams<T>, t: T) -> T {
    ap.i_leak0 * ((t - T::of(device::defaults::T_REF)) / ap.t_leak_scale).exp()
}

/// Static power `v · i_leak`, watts.
pub fn static_power<T: Real>(v: T, i_leak: T) -> T {
    debug_assert!(v >= T::zero());
    v * i_leak
}

/// Dynamic power `alpha · c_sw · v² · f`, watts.
pub fn dynamic_power<T: Real>(ap: &ActivityParams<T>, v: T, f: T) -> T {
    debug_assert!(v >= T::zero() && f >= T::zero());
    ap.alpha * ap.c_sw * v * v * f
}

/// Maps a normalized frequency (fraction of nominal) to the normalized
/// supply voltage the linearized delay model predicts for it:
/// `f_norm · (1 − v_th/v_max) + v_th/v_max`.
///
/// At `f_norm = 0` the voltage floor is the threshold ratio; at
/// `f_norm = 1` it is exactly 1.
pub fn normalized_voltage<T: Real>(f_norm: T, v_th: T, v_max: T) -> T {
    debug_assert!(f_norm >= T::zero() && f_norm <= T::one());
    debug_assert!(v_th > T::zero() && v_th < v_max);
    let floor = v_th / v_max;
    f_norm + floor * (T::one() - f_norm)
}

/// Static and dynamic power ratios after a supply change at fixed frequency
/// and leakage: `(v_new/v_old, (v_new/v_old)²)`.
pub fn power_ratios<T: Real>(v_new: T, v_old: T) -> (T, T) {
    debug_assert!(v_old > T::zero());
    let r = v_new / v_old;
    (r, r * r)
}

/// Assembles the full static/dynamic breakdown at one operating point.
pub fn power_breakdown<T: Real>(ap: &ActivityParams<T>, v: T, f: T, t: T) -> PowerBreakdown<T> {
    let static_w = static_power(v, leakage_current(ap, t));
    let dynamic_w = dynamic_power(ap, v, f);
    PowerBreakdown { static_w, dynamic_w, total_w: static_w + dynamic_w, v, f, t }
}
