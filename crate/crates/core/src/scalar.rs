//! Scalar abstractions.
//!
//! Floating-point kernels are written against [`Scalar`] so that `f32` and
//! `f64` builds share one code path. Exact walk evolution uses [`Weight`],
//! which is also implemented for rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Sum + Default + Send + Sync + 'static
{
    /// Machine epsilon scaled to a usable default relative tolerance.
    fn default_tol() -> Self;

    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("representable count")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn default_tol() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn default_tol() -> Self {
        1e-4
    }
}

/// Probability weight carried by the exact walk evolution.
///
/// Only ring operations and division by a vertex degree are needed, so the
/// same evolution runs in floating point and in exact rational arithmetic.
pub trait Weight: Clone + Num + Debug + Send + Sync {
    fn from_count(n: usize) -> Self;
    fn approx(&self) -> f64;
}

impl Weight for f64 {
    fn from_count(n: usize) -> Self {
        n as f64
    }
    fn approx(&self) -> f64 {
        *self
    }
}

impl Weight for f32 {
    fn from_count(n: usize) -> Self {
        n as f32
    }
    fn approx(&self) -> f64 {
        *self as f64
    }
}

impl Weight for Ratio<i64> {
    fn from_count(n: usize) -> Self {
        Ratio::from_integer(n as i64)
    }
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Weight for Ratio<BigInt> {
    fn from_count(n: usize) -> Self {
        Ratio::from_integer(BigInt::from_usize(n).expect("count"))
    }
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}
