//! Scalar abstraction shared by the lattice and dynamics code.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar (`f32` or `f64`).
///
/// Transcendental functions come from [`RealField`]; conversions from
/// `num-traits`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn is_finite_value(self) -> bool;
}

impl Real for f32 {
    #[inline]
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Real for f64 {
    #[inline]
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}
