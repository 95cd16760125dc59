//! Scalar abstraction: every numerical routine in the crate is generic over
//! `f32` or `f64` through [`Real`].

use std::fmt::{Display, LowerExp};

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Floating point scalar usable by the simulator: `f32` or `f64`.
///
/// `Real` bundles what the FFT backend needs ([`FftNum`]) with the usual
/// [`Float`] / [`FloatConst`] arithmetic so that lattices, samplers and
/// oracles can be written once.
pub trait Real: FftNum + Float + FloatConst + Default + Display + LowerExp {
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count or index into this scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
