//! Scalar abstraction shared by the geometric kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the geometry, frame and guidance code is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// assume `f64`; `f32` instantiations are useful for embedded targets where
/// single precision is enough for guidance but not for the exact checks.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_pi<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut r = a % two_pi;
    if r <= -T::PI() {
        r = r + two_pi;
    } else if r > T::PI() {
        r = r - two_pi;
    }
    r
}

/// Shift `next` by a multiple of 2π so it lies within π of `prev`.
pub fn unwrap_angle<T: Real>(prev: T, next: T) -> T {
    prev + wrap_pi(next - prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_and_unwrap() {
        assert!((wrap_pi(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_pi(-0.5 * PI) + 0.5 * PI).abs() < 1e-12);
        // crossing the branch cut keeps the sequence continuous
        let a = unwrap_angle(3.1_f64, -3.1);
        assert!((a - (2.0 * PI - 3.1)).abs() < 1e-12);
        assert_eq!(f32::lit(0.5), 0.5f32);
    }
}
