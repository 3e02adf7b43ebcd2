//! Error type shared by the model, measurement, tuning, and characterization
//! layers.

use core::fmt;

/// Convenience alias for fallible operations in this crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors surfaced by model evaluation, measurement, tuning, and fitting.
///
/// Numeric payloads are widened to `f64` regardless of the scalar the model
/// runs in, so errors stay printable and comparable without dragging generics
/// through every signature.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Supply voltage at or below the validity floor of the delay model
    /// (`v_th` plus margin); the alpha-power law diverges there.
    VoltageBelowFloor { v: f64, floor: f64 },
    /// Supply voltage outside the regulator limits.
    VoltageOutOfRange { v: f64, v_min: f64, v_max: f64 },
    /// Requested supply voltage does not sit on the regulator step grid.
    VoltageOffGrid { v: f64, step: f64 },
    /// The measurement window was long enough to wrap the 16-bit counter, so
    /// the ring-oscillator frequency cannot be recovered from the sample.
    CounterOverflow { window_s: f64 },
    /// PLL core-clock divider of zero.
    ZeroDivider,
    /// No in-range supply voltage satisfies the requested operating point.
    Infeasible { f_hz: f64, v_max: f64 },
    /// Not enough, or degenerate, data for a fit.
    Degenerate { what: &'static str },
    /// A configuration value violates its documented range. `field` is the
    /// dotted path of the offending key.
    InvalidConfig { field: &'static str, reason: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::VoltageBelowFloor { v, floor } => {
                write!(f, "supply voltage {v:.4} V is below the delay-model validity floor {floor:.4} V")
            }
            Error::VoltageOutOfRange { v, v_min, v_max } => {
                write!(f, "supply voltage {v:.4} V outside regulator limits [{v_min:.3}, {v_max:.3}] V")
            }
            Error::VoltageOffGrid { v, step } => {
                write!(f, "supply voltage {v:.6} V is not a multiple of the {:.0} mV regulator step", step * 1e3)
            }
            Error::CounterOverflow { window_s } => {
                write!(f, "16-bit ring-oscillator counter wrapped within the {:.1} us window; shorten the window", window_s * 1e6)
            }
            Error::ZeroDivider => write!(f, "PLL core-clock divider is zero"),
            Error::Infeasible { f_hz, v_max } => {
                write!(f, "no supply voltage up to {v_max:.3} V sustains a core clock of {:.1} MHz", f_hz / 1e6)
            }
            Error::Degenerate { what } => write!(f, "not enough data to fit: {what}"),
            Error::InvalidConfig { field, reason } => write!(f, "config `{field}`: {reason}"),
        }
    }
}

impl std::error::Error for Error {}
