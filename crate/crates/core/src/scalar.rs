//! Scalar abstraction: the engine is generic over the working float type.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar the whole engine is generic over (`f32` or `f64`).
///
/// `RealField` supplies the linear-algebra surface (nalgebra factorizations),
/// `FromPrimitive`/`ToPrimitive` move constants and report values across the
/// `f64` boundary.
pub trait Scalar:
    RealField
    + FromPrimitive
    + ToPrimitive
    + Copy
    + Default
    + serde::Serialize
    + serde::de::DeserializeOwned
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Pull an `f64` constant into the working scalar type.
#[inline]
pub fn real<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant not representable in scalar type")
}

/// Convert a scalar to `f64` for reporting.
#[inline]
pub fn approx_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().expect("scalar not representable as f64")
}
