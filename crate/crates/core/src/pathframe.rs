//! Tangent-aligned path frame and the track error expressed in it.

use crate::error::{Error, Result};
use crate::phspline::PHSpline;
use crate::quat::Quaternion;
use crate::scalar::{unwrap_angle, Real};
use crate::vec3::Vec3;

/// Along-, cross- and vertical-track error (m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackError<T> {
    pub s: T,
    pub e: T,
    pub h: T,
}

impl<T: Real> TrackError<T> {
    pub fn as_vec(self) -> Vec3<T> {
        Vec3::new(self.s, self.e, self.h)
    }

    pub fn norm(self) -> T {
        self.as_vec().norm()
    }
}

/// Azimuth/elevation of the path tangent and the quaternion built from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathFrame<T> {
    pub chi: T,
    pub nu: T,
    pub q: Quaternion<T>,
    /// Tangent was vertical; `chi` was carried over from the previous value.
    pub vertical: bool,
}

impl<T: Real> PathFrame<T> {
    pub fn from_tangent(tangent: Vec3<T>, prev_chi: Option<T>) -> Result<Self> {
        let (chi, nu, vertical) = path_angles(tangent, prev_chi)?;
        Ok(Self { chi, nu, q: path_quaternion(chi, nu), vertical })
    }

    pub fn at(spline: &PHSpline<T>, u: T, prev_chi: Option<T>) -> Result<Self> {
        Self::from_tangent(spline.hodograph(u), prev_chi)
    }

    /// Unit tangent, `Q_p (1,0,0) Q_p*`.
    pub fn tangent(&self) -> Vec3<T> {
        self.q.rotate(Vec3::unit_x())
    }

    /// Express a navigation-frame offset in the path frame.
    pub fn to_path(&self, v: Vec3<T>) -> TrackError<T> {
        let r = self.q.rotate_inverse(v);
        TrackError { s: r.x, e: r.y, h: r.z }
    }
}

/// Azimuth `chi = atan2(y', x')` and elevation `nu = atan2(-z', sqrt(x'^2 + y'^2))`.
///
/// For a vertical tangent the azimuth is undefined: `prev_chi` (or 0) is
/// returned and the flag is set. When `prev_chi` is given the azimuth is
/// unwrapped to stay within pi of it.
pub fn path_angles<T: Real>(hodograph: Vec3<T>, prev_chi: Option<T>) -> Result<(T, T, bool)> {
    let n = hodograph.norm();
    if !(n > T::lit(1e-9)) {
        return Err(Error::InvalidSpline(n.as_f64()));
    }
    let horiz = hodograph.x.hypot(hodograph.y);
    let nu = (-hodograph.z).atan2(horiz);
    if horiz <= T::lit(1e-12) * n {
        return Ok((prev_chi.unwrap_or_else(T::zero), nu, true));
    }
    let chi = hodograph.y.atan2(hodograph.x);
    let chi = match prev_chi {
        Some(p) => unwrap_angle(p, chi),
        None => chi,
    };
    Ok((chi, nu, false))
}

/// `Qz(chi) Qy(nu)`.
pub fn path_quaternion<T: Real>(chi: T, nu: T) -> Quaternion<T> {
    Quaternion::axis_rotation_z(chi) * Quaternion::axis_rotation_y(nu)
}

/// Unit vector with azimuth `chi` and elevation `nu` (z down).
pub fn direction<T: Real>(chi: T, nu: T) -> Vec3<T> {
    let (sc, cc) = chi.sin_cos();
    let (sn, cn) = nu.sin_cos();
    Vec3::new(cn * cc, cn * sc, -sn)
}

/// Track error of `follow` relative to the path point at `u`, and the frame used.
pub fn track_error<T: Real>(
    follow: Vec3<T>,
    spline: &PHSpline<T>,
    u: T,
    prev_chi: Option<T>,
) -> Result<(TrackError<T>, PathFrame<T>)> {
    let frame = PathFrame::at(spline, u, prev_chi)?;
    Ok((frame.to_path(follow - spline.eval(u)), frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn matrix_oracle(q: Quaternion<f64>, v: Vec3<f64>) -> Vec3<f64> {
        let (w, x, y, z) = (q.w, q.x, q.y, q.z);
        let r = [
            [1. - 2. * (y * y + z * z), 2. * (x * y - w * z), 2. * (x * z + w * y)],
            [2. * (x * y + w * z), 1. - 2. * (x * x + z * z), 2. * (y * z - w * x)],
            [2. * (x * z - w * y), 2. * (y * z + w * x), 1. - 2. * (x * x + y * y)],
        ];
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    #[test]
    fn angle_examples() {
        let (c, n, _) = path_angles(Vec3::new(1.0, 0.0, 0.0), None).unwrap();
        assert_eq!((c, n), (0.0, 0.0));
        let (c, n, _) = path_angles(Vec3::new(0.0, 1.0, 0.0), None).unwrap();
        assert!((c - FRAC_PI_2).abs() < 1e-15 && n == 0.0);
        let (c, n, vert) = path_angles(Vec3::new(0.0, 0.0, -1.0), Some(0.7)).unwrap();
        assert!(vert && c == 0.7 && (n - FRAC_PI_2).abs() < 1e-15);
        let t = path_quaternion(c, n).rotate(Vec3::unit_x());
        assert!((t - Vec3::new(0.0, 0.0, -1.0)).max_abs() < 1e-12);
        assert!(path_angles(Vec3::<f64>::zeros(), None).is_err());
    }

    #[test]
    fn quaternion_examples() {
        assert_eq!(path_quaternion(0.0, 0.0), Quaternion::identity());
        assert_eq!(path_quaternion(FRAC_PI_2, 0.0), Quaternion::axis_rotation_z(FRAC_PI_2));
    }

    #[test]
    fn azimuth_unwraps() {
        let (c, _, _) = path_angles(Vec3::new(-1.0, -0.01, 0.0), Some(3.1)).unwrap();
        assert!(c > PI);
    }

    #[test]
    fn along_track_offset() {
        let frame = PathFrame::<f64>::from_tangent(Vec3::new(1.0, 2.0, -0.5), None).unwrap();
        let t = frame.tangent();
        let err = frame.to_path(t * 0.3);
        assert!((err.s - 0.3).abs() < 1e-12 && err.e.abs() < 1e-12 && err.h.abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn direction_oracle(chi in -PI..PI, nu in -1.5..1.5f64) {
            let t = path_quaternion(chi, nu).rotate(Vec3::unit_x());
            prop_assert!((t - direction(chi, nu)).max_abs() <= 1e-12);
        }

        #[test]
        fn frame_aligns_with_tangent(x in -5.0..5.0f64, y in -5.0..5.0f64, z in -5.0..5.0f64) {
            let d = Vec3::new(x, y, z);
            prop_assume!(d.norm() > 1e-6);
            let f = PathFrame::from_tangent(d, None).unwrap();
            prop_assert!((f.tangent() - d / d.norm()).max_abs() <= 1e-9);
        }

        #[test]
        fn track_error_oracle(x in -5.0..5.0f64, y in -5.0..5.0f64, z in -5.0..5.0f64,
                              ex in -9.0..9.0f64, ey in -9.0..9.0f64, ez in -9.0..9.0f64) {
            let d = Vec3::new(x, y, z);
            prop_assume!(d.norm() > 1e-6);
            let f = PathFrame::from_tangent(d, None).unwrap();
            let off = Vec3::new(ex, ey, ez);
            let err = f.to_path(off);
            let oracle = matrix_oracle(f.q.conj(), off);
            prop_assert!((err.as_vec() - oracle).max_abs() <= 1e-10 * off.norm().max(1.0));
            prop_assert!((err.norm() - off.norm()).abs() <= 1e-10 * off.norm().max(1.0));
        }
    }
}
