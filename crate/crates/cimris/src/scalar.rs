//! Floating-point abstraction for the simulation and analysis kernels.
//!
//! Everything numeric in this crate is generic over [`Scalar`], which is
//! implemented for `f32` and `f64`. The concrete aliases at the crate root
//! pin `f64`, which is what the CLI and the acceptance suite use.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Scalar type the core math runs on: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum<Self>
    + Send
    + Sync
    + Display
    + LowerExp
    + Debug
    + 'static
{
    /// Draw a standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Convert an `f64` constant, panicking only on NaN-free overflow cases
    /// that cannot occur for the literals used in this crate.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("literal not representable in scalar type")
    }

    /// Widen to `f64` for reporting and serialization.
    fn as_f64(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        rng.sample(StandardNormal)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f32 {
        rng.sample(StandardNormal)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        f64::from(self)
    }
}
