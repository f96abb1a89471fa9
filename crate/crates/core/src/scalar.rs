//! Scalar abstraction shared by the generic numerical routines.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar accepted by the generic parts of the crate (`f32`, `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
}

/// Converts an `f64` constant into `F`. Out-of-range values saturate to ±∞.
#[inline]
pub fn lit<F: Real>(x: f64) -> F {
    F::from_f64(x).unwrap_or_else(|| if x > 0.0 { F::infinity() } else { F::neg_infinity() })
}

/// Lossy conversion back to `f64` for reporting.
#[inline]
pub fn to_f64<F: Real>(x: F) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
