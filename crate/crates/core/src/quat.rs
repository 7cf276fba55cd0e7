//! Quaternion algebra, scalar-first `(w, x, y, z)`.
//!
//! Pure vectors are embedded with `w = 0` only at frame-conversion
//! boundaries; everywhere else the crate passes [`Vec3`] values.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Norm deviation tolerated before `rotate` renormalizes its input.
pub const RENORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Quaternion<T> {
    #[inline]
    pub const fn new(w: T, x: T, y: T, z: T) -> Self {
        Self { w, x, y, z }
    }

    #[inline]
    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    /// Embed a 3-vector as a pure quaternion (`w = 0` exactly).
    #[inline]
    pub fn pure(v: Vec3<T>) -> Self {
        Self::new(T::zero(), v.x, v.y, v.z)
    }

    #[inline]
    pub fn from_parts(w: T, v: Vec3<T>) -> Self {
        Self::new(w, v.x, v.y, v.z)
    }

    #[inline]
    pub fn vector(self) -> Vec3<T> {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn from_f64(q: [f64; 4]) -> Self {
        Self::new(T::lit(q[0]), T::lit(q[1]), T::lit(q[2]), T::lit(q[3]))
    }

    pub fn to_f64(self) -> [f64; 4] {
        [self.w.as_f64(), self.x.as_f64(), self.y.as_f64(), self.z.as_f64()]
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Euclidean inner product on R^4.
    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn normalize(self) -> Result<Self> {
        let n = self.norm();
        if !(n > T::lit(1e-12)) {
            return Err(Error::Degenerate(format!(
                "cannot normalize quaternion of norm {n}"
            )));
        }
        Ok(self * (T::one() / n))
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Rotation by `angle` about the body z axis: `(cos a/2, 0, 0, sin a/2)`.
    pub fn axis_rotation_z(angle: T) -> Self {
        let half = angle / T::lit(2.0);
        Self::new(half.cos(), T::zero(), T::zero(), half.sin())
    }

    /// Rotation by `angle` about the body y axis: `(cos a/2, 0, sin a/2, 0)`.
    pub fn axis_rotation_y(angle: T) -> Self {
        let half = angle / T::lit(2.0);
        Self::new(half.cos(), T::zero(), half.sin(), T::zero())
    }

    /// Rotation by `angle` about the x axis.
    pub fn axis_rotation_x(angle: T) -> Self {
        let half = angle / T::lit(2.0);
        Self::new(half.cos(), half.sin(), T::zero(), T::zero())
    }

    /// Vector part of `q v q*`.
    ///
    /// Inputs whose norm is off by more than [`RENORM_TOL`] are renormalized
    /// first, so slowly drifting integrator states still act as rotations.
    pub fn rotate(self, v: Vec3<T>) -> Vec3<T> {
        let q = if (self.norm() - T::one()).abs() > T::lit(RENORM_TOL) {
            self.normalize().unwrap_or_else(|_| Self::identity())
        } else {
            self
        };
        q.sandwich(v)
    }

    /// Vector part of `q* v q`, the inverse rotation.
    pub fn rotate_inverse(self, v: Vec3<T>) -> Vec3<T> {
        self.conj().rotate(v)
    }

    /// Vector part of `q v q*` without any normalization. For a non-unit `q`
    /// this scales by `|q|^2`, which is what the PH hodograph form relies on.
    #[inline]
    pub fn sandwich(self, v: Vec3<T>) -> Vec3<T> {
        // q v q* = (w^2 - |qv|^2) v + 2 (qv.v) qv + 2 w (qv x v)
        let qv = self.vector();
        let w = self.w;
        let two = T::lit(2.0);
        v * (w * w - qv.norm_squared()) + qv * (two * qv.dot(v)) + qv.cross(v) * (two * w)
    }

    /// `a w b*`, vector part, for the PH hodograph bilinear form.
    #[inline]
    pub fn bilinear(self, w: Vec3<T>, other: Self) -> Vec3<T> {
        (self * Self::pure(w) * other.conj()).vector()
    }
}

impl<T: Real> Mul for Quaternion<T> {
    type Output = Self;
    /// Hamilton product.
    #[inline]
    fn mul(self, b: Self) -> Self {
        let a = self;
        Self::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

impl<T: Real> Mul<T> for Quaternion<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Add for Quaternion<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Quaternion<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Quaternion<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Free-function form of the Hamilton product.
pub fn mul<T: Real>(a: Quaternion<T>, b: Quaternion<T>) -> Quaternion<T> {
    a * b
}

pub fn conj<T: Real>(q: Quaternion<T>) -> Quaternion<T> {
    q.conj()
}

pub fn normalize<T: Real>(q: Quaternion<T>) -> Result<Quaternion<T>> {
    q.normalize()
}

pub fn rotate<T: Real>(q: Quaternion<T>, v: Vec3<T>) -> Vec3<T> {
    q.rotate(v)
}

pub fn axis_rotation_z<T: Real>(angle: T) -> Quaternion<T> {
    Quaternion::axis_rotation_z(angle)
}

pub fn axis_rotation_y<T: Real>(angle: T) -> Quaternion<T> {
    Quaternion::axis_rotation_y(angle)
}
