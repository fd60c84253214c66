//! Floating-point abstraction for the closed-form theory.
//!
//! The theory only needs field arithmetic, `sqrt`, and the complementary
//! error function, so it is written once over [`Scalar`] and instantiated for
//! `f32` and `f64`. The simulator is `f64` only.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// f32 or f64.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    fn erfc(self) -> Self;

    /// Lossless for the literals used in the formulas.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Scalar for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

impl Scalar for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

/// Standard normal CDF, `Φ(x) = erfc(-x/√2)/2`.
pub fn normal_cdf<T: Scalar>(x: T) -> T {
    T::half() * (-x * T::lit(std::f64::consts::FRAC_1_SQRT_2)).erfc()
}

pub(crate) fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
