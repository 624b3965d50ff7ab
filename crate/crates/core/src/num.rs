//! Scalar abstraction shared by the closed-form engine.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the analytic engine is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Smallest tail tolerance that is still meaningful at this precision.
    fn min_tolerance() -> Self;

    /// Rescaling threshold for recurrences that may overflow.
    fn rescale_threshold() -> Self;

    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("index representable")
    }
}

impl Real for f32 {
    fn min_tolerance() -> Self {
        1e-6
    }
    fn rescale_threshold() -> Self {
        1e16
    }
}

impl Real for f64 {
    fn min_tolerance() -> Self {
        1e-15
    }
    fn rescale_threshold() -> Self {
        1e100
    }
}
