//! Scalar abstraction shared by every numerical routine in the crate.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};

/// Floating point type the schemes can run on: `f32` or `f64`.
///
/// The well-balanced tolerances in the test-suite are calibrated for `f64`;
/// `f32` works for everything but only reaches single-precision balance.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon as a plain `f64`, handy for tolerance scaling.
    const EPS_F64: f64;
}

impl Real for f32 {
    const EPS_F64: f64 = f32::EPSILON as f64;
}

impl Real for f64 {
    const EPS_F64: f64 = f64::EPSILON;
}

/// Converts an `f64` literal to `T`.
#[inline(always)]
pub fn lit<T: Real>(v: f64) -> T {
    // every f64 is representable (possibly rounded) in f32 and f64
    T::from_f64(v).unwrap()
}

/// Converts a signed index to `T`.
#[inline(always)]
pub fn idx<T: Real>(i: isize) -> T {
    T::from_isize(i).unwrap()
}
