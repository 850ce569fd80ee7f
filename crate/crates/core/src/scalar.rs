//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::{Complex, RealField};
use num_traits::ToPrimitive;

/// Real floating-point scalar the landscape machinery is generic over.
///
/// Implemented for `f32` and `f64`. All tolerances in the crate are
/// specified as `f64` literals and converted with [`real`].
pub trait Real: RealField + Copy + ToPrimitive + Send + Sync {}

impl<T> Real for T where T: RealField + Copy + ToPrimitive + Send + Sync {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts a working scalar to `f64` for reporting and serialization.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cre<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Absolute value without method-resolution ambiguity between supertraits.
#[inline]
pub(crate) fn abs<T: Real>(x: T) -> T {
    if x < T::zero() {
        -x
    } else {
        x
    }
}

#[inline]
pub(crate) fn max<T: Real>(a: T, b: T) -> T {
    if a >= b {
        a
    } else {
        b
    }
}

/// Tolerance expressed at `f64` resolution, widened by the ratio of machine
/// epsilons for lower-precision scalars.
#[inline]
pub fn tol<T: Real>(base: f64) -> T {
    let ratio = to_f64(T::default_epsilon()) / f64::EPSILON;
    real(base * ratio.max(1.0))
}
