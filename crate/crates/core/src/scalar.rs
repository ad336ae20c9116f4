//! Floating point abstraction shared by the sampler and the estimators.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

// Wraps num_traits::Float with the special functions the collapsed
// likelihood needs.
pub trait Scalar:
    Float
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    fn ln_gamma(self) -> Self;

    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    fn of_count<C: ToPrimitive>(n: C) -> Self {
        <Self as num_traits::NumCast>::from(n).expect("count is representable")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("scalar converts to f64")
    }
}

impl Scalar for f32 {
    fn ln_gamma(self) -> Self {
        libm::lgammaf_r(self).0
    }
}

impl Scalar for f64 {
    fn ln_gamma(self) -> Self {
        libm::lgamma_r(self).0
    }
}
