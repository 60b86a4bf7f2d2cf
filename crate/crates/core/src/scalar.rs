//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Floating point scalar usable throughout the pipeline: `f32` or `f64`.
///
/// `Float` and `FftNum` (through `Signed`) both provide `abs` and `signum`, so generic
/// code calls those as `Float::abs(x)`.
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Default + Display + Debug + Send + Sync + 'static
{
    /// Converts an `f64` constant into `Self`.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    /// Converts a count or index into `Self`.
    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize is representable")
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("finite scalar")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + FftNum
        + Default
        + Display
        + Debug
        + Send
        + Sync
        + 'static
{
}
