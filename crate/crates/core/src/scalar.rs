//! Scalar abstraction shared by the closed-form layers.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar the closed-form code is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// `e^{iφ} - 1` without cancellation for small `φ`.
#[inline]
pub(crate) fn expm1_i<T: Real>(phi: T) -> Complex<T> {
    let half = phi / lit(2.0);
    let s = half.sin();
    // 2i sin(φ/2) e^{iφ/2}
    Complex::new(-lit::<T>(2.0) * s * s, lit::<T>(2.0) * s * half.cos())
}

/// Principal argument in (−π, π].
#[inline]
pub fn principal_arg<T: Real>(z: Complex<T>) -> T {
    let a = z.im.atan2(z.re);
    if a <= -T::PI() {
        a + T::PI() + T::PI()
    } else {
        a
    }
}

/// Largest `x` for which `exp(-x)` is still comfortably representable.
///
/// 700 for `f64`, 79 for `f32`.
pub fn underflow_limit<T: Real>() -> T {
    (-T::min_positive_value().ln()).floor() - lit(8.0)
}
