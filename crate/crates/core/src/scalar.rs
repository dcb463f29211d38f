//! Scalar abstraction for the numeric core.
//!
//! Everything numeric in this crate is generic over [`Real`], which is
//! satisfied by `f32` and `f64`. The crate root re-exports the main types
//! with `f64` defaults; tolerances quoted in the documentation assume `f64`.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable throughout the crate: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Convert an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must be convertible to the scalar type")
}
