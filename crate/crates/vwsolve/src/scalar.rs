//! Scalar abstraction for the numerical kernels.
//!
//! Everything downstream is generic over [`Real`] so the solvers run in
//! `f32` or `f64`; the crate root exports `f64` aliases for the common case.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point scalar usable by the solvers.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` for constants and grid metadata.
    fn from_f64_c(v: f64) -> Self {
        Self::from_f64(v).expect("constant out of range for scalar type")
    }

    fn from_usize_c(v: usize) -> Self {
        Self::from_usize(v).expect("usize out of range for scalar type")
    }

    fn to_f64_c(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}
