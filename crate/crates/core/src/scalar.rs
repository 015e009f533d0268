//! Floating-point abstraction for the analytical model.
//!
//! All closed-form expressions are written against [`Real`] so the model can
//! be instantiated at `f32` or `f64`. Every public type defaults its scalar
//! parameter to `f64`, which is what the optimizer, the oracles and the CLI
//! use; the stated tolerances assume double precision.

use crate::erf;

/// Scalar type for the model: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    fn erf(self) -> Self;
    fn erfc(self) -> Self;

    /// Lift an `f64` literal into the scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }
}

impl Real for f64 {
    #[inline]
    fn erf(self) -> f64 {
        erf::erf(self)
    }

    #[inline]
    fn erfc(self) -> f64 {
        erf::erfc(self)
    }
}

impl Real for f32 {
    #[inline]
    fn erf(self) -> f32 {
        erf::erf(self as f64) as f32
    }

    #[inline]
    fn erfc(self) -> f32 {
        erf::erfc(self as f64) as f32
    }
}
