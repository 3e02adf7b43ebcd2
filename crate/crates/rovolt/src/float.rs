//! Scalar abstraction used by every model layer.
//!
//! All physical quantities (volts, seconds, hertz, watts, °C) are generic over
//! a floating-point scalar so the same model runs in `f32` or `f64`.
//! Configuration values and random draws are always `f64` and are narrowed at
//! the boundary, which keeps generated populations identical across scalar
//! choices (up to representation).

use core::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar for model quantities (`f32` or `f64`).
///
/// Extends the num-traits float bundle with the two conversions the crate
/// needs constantly: narrowing an `f64` constant into the working scalar and
/// widening back out for reporting.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Debug + Display + Send + Sync + 'static
{
    /// Narrows an `f64` (config value, RNG draw, literal constant) into `Self`.
    ///
    /// Panics on values unrepresentable as `Self` (e.g. NaN from a broken
    /// upstream computation); configuration validation rejects non-finite
    /// input before it gets here.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("scalar conversion from finite f64")
    }

    /// Widens to `f64` for formatting and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
