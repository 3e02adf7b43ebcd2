//! Closed-loop supply-voltage tuning against on-die ring-oscillator speed
//! sensors.
//!
//! The crate simulates the whole loop end to end:
//!
//! * [`device`] — the silicon: alpha-power-law inverter delay, ring
//!   oscillators, hidden maximum safe frequency, thermal dynamics, stress
//!   outcomes, and Monte-Carlo die populations.
//! * [`power`] — static/dynamic CMOS power and savings ratios.
//! * [`measure`] — the firmware view: 16-bit counter windows, wrap
//!   detection, repeat-averaged slowest-oscillator readings, warm-up.
//! * [`tuner`] — the production algorithm: PLL readback, target oscillator
//!   frequency, linear voltage prediction with conservative rounding, and
//!   slew-limited supply trajectories.
//! * [`characterize`] — one-time lab work: frequency/voltage sweeps, the
//!   brute-force safe-voltage oracle, ratio and slope fitting, validation.
//! * [`config`] — the TOML schema tying every default together.
//! * [`harness`] — experiment drivers and CSV/JSON emission used by the CLI.
//!
//! All model code is generic over the scalar type via [`float::Real`]
//! (`f32` or `f64`); the concrete aliases below fix `f64` for the harness
//! and CLI surface.

pub mod characterize;
pub mod config;
pub mod device;
pub mod error;
pub mod float;
pub mod harness;
pub mod measure;
pub mod power;
pub mod tuner;

pub use error::{Error, Result};
pub use float::Real;

/// Default-scalar (`f64`) aliases for the model types, used by the harness
/// and the command-line surface.
pub mod f64_types {
    pub use crate::characterize::{
        FittedParams, SweepGrid, SweepResult, SweepRow, ValidationReport, ValidationRow,
    };
    pub use crate::device::{
        ChipSample, DelayParams, RingOscillator, ThermalParams, ThermalState,
    };
    pub use crate::measure::{CounterSample, MeasurementConfig};
    pub use crate::power::{ActivityParams, PowerBreakdown};
    pub use crate::tuner::{
        SupplyLimits, SupplyState, TargetVoltage, TuningParams, TuningReport,
    };
}
