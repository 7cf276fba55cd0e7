//! One PH quintic span: solution of the first-order Hermite problem in
//! quaternion form and evaluation of the resulting Bézier curve.

use serde::{Deserialize, Serialize};

use super::bernstein::{antiderivative_quartic, de_casteljau, product_quartic};
use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Tangents closer than this (in `1 + cos`) to `-w` trigger the frame swap.
const ANTIPARALLEL_TOL: f64 = 1e-6;

/// Free-angle selection for the two-parameter Hermite family.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngleCriterion {
    /// Cubic-compatible ("CC") selection: the member whose middle preimage
    /// coefficient is closest to the mean of the end coefficients,
    /// `min |A1 - (A0 + A2)/2|`. Data sampled from a PH cubic is reproduced.
    #[default]
    #[serde(alias = "cc")]
    CubicCompatible,
    /// Caller-supplied angles `(phi0, phi2)`.
    Fixed { phi0: f64, phi2: f64 },
}

impl AngleCriterion {
    /// Angles used when the family is parameterized explicitly.
    pub const DEFAULT_FIXED: AngleCriterion = AngleCriterion::Fixed {
        phi0: -std::f64::consts::FRAC_PI_2,
        phi2: -std::f64::consts::FRAC_PI_2,
    };
}

/// A solution of `A w A* = c` on the circle of preimages indexed by `phi`.
///
/// With `c = |c| (l, m, n)` and `w = (1, 0, 0)`:
/// `A = sqrt(|c|(1+l)/2) (-sin phi, cos phi, (m cos phi + n sin phi)/(1+l), (n cos phi - m sin phi)/(1+l))`.
/// `phi = -pi/2` is the minimal-rotation preimage. Singular for `c` parallel to `-w`.
pub fn solve_awa<T: Real>(c: Vec3<T>, phi: T) -> Quaternion<T> {
    let n = c.norm();
    if n == T::zero() {
        return Quaternion::zero();
    }
    let (l, m, nu) = (c.x / n, c.y / n, c.z / n);
    let one_l = T::one() + l;
    let scale = (n * one_l / T::lit(2.0)).sqrt();
    let (s, co) = phi.sin_cos();
    Quaternion::new(
        -s,
        co,
        (m * co + nu * s) / one_l,
        (nu * co - m * s) / one_l,
    ) * scale
}

fn near_antiparallel<T: Real>(v: Vec3<T>) -> bool {
    let n = v.norm();
    n > T::zero() && v.x / n <= T::lit(-1.0 + ANTIPARALLEL_TOL)
}

/// Hermite data for one span expressed in a working frame rotated by `frame`.
struct LocalProblem<T> {
    delta: Vec3<T>,
    da: Vec3<T>,
    db: Vec3<T>,
    h: T,
}

impl<T: Real> LocalProblem<T> {
    fn new(frame: Quaternion<T>, delta: Vec3<T>, da: Vec3<T>, db: Vec3<T>, h: T) -> Self {
        Self {
            delta: frame.rotate_inverse(delta),
            da: frame.rotate_inverse(da),
            db: frame.rotate_inverse(db),
            h,
        }
    }

    fn ends_regular(&self) -> bool {
        !near_antiparallel(self.da) && !near_antiparallel(self.db)
    }

    /// Right-hand side of the middle subproblem `B w B* = c`.
    fn middle_rhs(&self, a0: Quaternion<T>, a2: Quaternion<T>) -> Vec3<T> {
        let w = Vec3::unit_x();
        let sym = a0.bilinear(w, a2) + a2.bilinear(w, a0);
        self.delta * (T::lit(120.0) / self.h) - (self.da + self.db) * T::lit(15.0) + sym * T::lit(5.0)
    }

    /// Preimage coefficients for the end angles, with the middle branch
    /// picked to minimize `|A1 - (A0 + A2)/2|`. Also returns that distance
    /// and the middle right-hand side.
    fn preimage(&self, phi0: T, phi2: T) -> ([Quaternion<T>; 3], T, Vec3<T>) {
        let a0 = solve_awa(self.da, phi0);
        let a2 = solve_awa(self.db, phi2);
        let c = self.middle_rhs(a0, a2);
        let s = a0 + a2;
        let b0 = solve_awa(c, -T::FRAC_PI_2());
        // B = B0 (cos t + i sin t); maximise <B, S>
        let b0i = b0 * Quaternion::new(T::zero(), T::one(), T::zero(), T::zero());
        let t = b0i.dot(s).atan2(b0.dot(s));
        let (st, ct) = t.sin_cos();
        let b = b0 * Quaternion::new(ct, st, T::zero(), T::zero());
        let quarter = T::lit(0.25);
        let a1 = b * quarter - s * T::lit(0.75);
        let dist = (a1 - s * T::lit(0.5)).norm();
        ([a0, a1, a2], dist, c)
    }

    /// `phi2 - phi0` minimizing the cubic-compatibility distance; the
    /// distance depends on the end angles only through their difference.
    fn cubic_compatible_angles(&self) -> (T, T) {
        let phi0 = -T::FRAC_PI_2();
        let f = |d: T| self.preimage(phi0, phi0 + d).1;
        let n = 144;
        let two_pi = T::PI() + T::PI();
        let step = two_pi / T::lit(n as f64);
        let mut best = (T::infinity(), T::zero());
        for i in 0..n {
            let d = -T::PI() + step * T::lit(i as f64);
            let v = f(d);
            if v < best.0 {
                best = (v, d);
            }
        }
        let d = golden_section(f, best.1 - step, best.1 + step, T::lit(1e-12));
        (phi0, phi0 + d)
    }
}

fn golden_section<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> T {
    let g = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - (b - a) * g;
    let mut d = a + (b - a) * g;
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * g;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * g;
            fd = f(d);
        }
    }
    (a + b) / T::lit(2.0)
}

/// One spline span `[u_start, u_start + h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PHQuinticSegment<T> {
    /// Bézier coefficients `A_0, A_1, A_2` of the quadratic preimage.
    pub preimage: [Quaternion<T>; 3],
    pub w_axis: Vec3<T>,
    pub control_points: [Vec3<T>; 6],
    pub u_start: T,
    pub h: T,
    /// Bernstein coefficients of the quartic parametric speed.
    pub sigma: [T; 5],
    /// End angles `(phi0, phi2)` in the frame the problem was solved in.
    pub angles: (T, T),
    pub length: T,
}

impl<T: Real> PHQuinticSegment<T> {
    /// Assemble a segment from its preimage; control points follow from the
    /// integrated hodograph starting at `q0`.
    pub fn from_preimage(
        preimage: [Quaternion<T>; 3],
        w_axis: Vec3<T>,
        q0: Vec3<T>,
        u_start: T,
        h: T,
        angles: (T, T),
    ) -> Self {
        let [a0, a1, a2] = preimage;
        let w = w_axis;
        let mut q = [q0; 6];
        q[1] = q[0] + a0.bilinear(w, a0) * (h / T::lit(5.0));
        q[2] = q[1] + (a0.bilinear(w, a1) + a1.bilinear(w, a0)) * (h / T::lit(10.0));
        q[3] = q[2]
            + (a0.bilinear(w, a2) + a1.bilinear(w, a1) * T::lit(4.0) + a2.bilinear(w, a0))
                * (h / T::lit(30.0));
        q[4] = q[3] + (a1.bilinear(w, a2) + a2.bilinear(w, a1)) * (h / T::lit(10.0));
        q[5] = q[4] + a2.bilinear(w, a2) * (h / T::lit(5.0));
        let three = T::lit(3.0);
        let sigma = [
            a0.norm_squared(),
            a0.dot(a1),
            (T::lit(2.0) * a1.norm_squared() + a0.dot(a2)) / three,
            a1.dot(a2),
            a2.norm_squared(),
        ];
        let length = h * sigma.iter().fold(T::zero(), |acc, &s| acc + s) / T::lit(5.0);
        Self {
            preimage,
            w_axis,
            control_points: q,
            u_start,
            h,
            sigma,
            angles,
            length,
        }
    }

    #[inline]
    pub fn u_end(&self) -> T {
        self.u_start + self.h
    }

    #[inline]
    pub fn local(&self, u: T) -> T {
        (u - self.u_start) / self.h
    }

    /// Position at local parameter `xi` in `[0, 1]`.
    pub fn point_local(&self, xi: T) -> Vec3<T> {
        de_casteljau(&self.control_points, xi)
    }

    /// Bernstein coefficients of the hodograph `d/du`.
    pub fn hodograph_coeffs(&self) -> [Vec3<T>; 5] {
        let q = &self.control_points;
        let k = T::lit(5.0) / self.h;
        [
            (q[1] - q[0]) * k,
            (q[2] - q[1]) * k,
            (q[3] - q[2]) * k,
            (q[4] - q[3]) * k,
            (q[5] - q[4]) * k,
        ]
    }

    /// Derivative with respect to the global parameter `u`.
    pub fn hodograph_local(&self, xi: T) -> Vec3<T> {
        de_casteljau(&self.hodograph_coeffs(), xi)
    }

    /// Hodograph from the quaternion form `A(xi) w A(xi)*`.
    pub fn hodograph_quaternion(&self, xi: T) -> Vec3<T> {
        let a = de_casteljau(&self.preimage, xi);
        a.bilinear(self.w_axis, a)
    }

    pub fn speed_local(&self, xi: T) -> T {
        de_casteljau(&self.sigma, xi)
    }

    /// Arc length from the segment start to local parameter `xi`.
    pub fn arc_length_local(&self, xi: T) -> T {
        if xi <= T::zero() {
            return T::zero();
        }
        if xi >= T::one() {
            return self.length;
        }
        self.h * de_casteljau(&antiderivative_quartic(&self.sigma), xi)
    }

    /// Bernstein coefficients (degree 8) of `|r'(u)|^2 - sigma(u)^2`.
    pub fn ph_residual_coeffs(&self) -> [T; 9] {
        let hc = self.hodograph_coeffs();
        let x = hc.map(|v| v.x);
        let y = hc.map(|v| v.y);
        let z = hc.map(|v| v.z);
        let xx = product_quartic(&x, &x);
        let yy = product_quartic(&y, &y);
        let zz = product_quartic(&z, &z);
        let ss = product_quartic(&self.sigma, &self.sigma);
        let mut out = [T::zero(); 9];
        for k in 0..9 {
            out[k] = xx[k] + yy[k] + zz[k] - ss[k];
        }
        out
    }

    /// Largest PH residual coefficient relative to the largest coefficient of `sigma^2`.
    pub fn ph_residual(&self) -> T {
        let ss = product_quartic(&self.sigma, &self.sigma);
        let scale = ss.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let res = self.ph_residual_coeffs().iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale > T::zero() {
            res / scale
        } else {
            res
        }
    }
}

/// Solve the first-order Hermite problem on one span.
///
/// `angles` are the end angles `(phi0, phi2)`; the middle coefficient takes
/// the branch closest to `(A0 + A2)/2`.
pub fn hermite_segment<T: Real>(
    pa: Vec3<T>,
    pb: Vec3<T>,
    da: Vec3<T>,
    db: Vec3<T>,
    h: T,
    angles: (T, T),
) -> Result<PHQuinticSegment<T>> {
    solve_segment(pa, pb, da, db, T::zero(), h, Selection::Angles(angles.0, angles.1))
}

/// Solve one span with the angles chosen by `criterion`.
pub fn hermite_segment_with<T: Real>(
    pa: Vec3<T>,
    pb: Vec3<T>,
    da: Vec3<T>,
    db: Vec3<T>,
    u_start: T,
    h: T,
    criterion: AngleCriterion,
) -> Result<PHQuinticSegment<T>> {
    let sel = match criterion {
        AngleCriterion::CubicCompatible => Selection::CubicCompatible,
        AngleCriterion::Fixed { phi0, phi2 } => Selection::Angles(T::lit(phi0), T::lit(phi2)),
    };
    solve_segment(pa, pb, da, db, u_start, h, sel)
}

#[derive(Clone, Copy)]
enum Selection<T> {
    Angles(T, T),
    CubicCompatible,
}

fn solve_segment<T: Real>(
    pa: Vec3<T>,
    pb: Vec3<T>,
    da: Vec3<T>,
    db: Vec3<T>,
    u_start: T,
    h: T,
    sel: Selection<T>,
) -> Result<PHQuinticSegment<T>> {
    if !(h > T::zero()) {
        return Err(Error::InvalidParameter(format!("knot interval h = {h} must be positive")));
    }
    let tiny = T::lit(1e-9);
    if da.norm() <= tiny || db.norm() <= tiny {
        return Err(Error::Degenerate("end tangent has zero length".into()));
    }
    let delta = pb - pa;
    let scale = pa.max_abs().max(pb.max_abs()).max(T::one());
    if delta.norm() <= T::lit(1e-12) * scale {
        return Err(Error::Degenerate("segment end points coincide".into()));
    }
    if !(delta.is_finite() && da.is_finite() && db.is_finite()) {
        return Err(Error::Degenerate("non-finite Hermite data".into()));
    }

    // The preimage formula is singular along -w; rotate the problem away
    // from that direction when needed and rotate the preimage back.
    let half = T::FRAC_PI_2();
    let frames = [
        Quaternion::identity(),
        Quaternion::axis_rotation_z(half),
        Quaternion::axis_rotation_y(half),
    ];
    for frame in frames {
        let prob = LocalProblem::new(frame, delta, da, db, h);
        if !prob.ends_regular() {
            continue;
        }
        let (phi0, phi2) = match sel {
            Selection::Angles(a, b) => (a, b),
            Selection::CubicCompatible => prob.cubic_compatible_angles(),
        };
        let (coeffs, _, c) = prob.preimage(phi0, phi2);
        if near_antiparallel(c) {
            continue;
        }
        let preimage = coeffs.map(|a| frame * a);
        return Ok(PHQuinticSegment::from_preimage(
            preimage,
            Vec3::unit_x(),
            pa,
            u_start,
            h,
            (phi0, phi2),
        ));
    }
    Err(Error::Degenerate(
        "no regular working frame for the Hermite problem".into(),
    ))
}
