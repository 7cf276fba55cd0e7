//! Line-of-sight style guidance toward a parametric path, current-drift
//! estimation and the mapping of desired head velocity onto the surge,
//! pitch-rate and yaw-rate commands of an under-actuated vehicle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathframe::{direction, PathFrame, TrackError};
use crate::phspline::PHSpline;
use crate::quat::Quaternion;
use crate::scalar::Real;
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuidanceParams<T> {
    /// Along-track gain (1/s).
    pub gamma: T,
    /// Nominal speed (m/s).
    pub u0: T,
    /// Lookahead distance (m).
    pub delta_e: T,
    /// Vertical lookahead ratio.
    pub mu: T,
    /// Estimator gain (1/s^2).
    pub k_c: T,
    /// Head position in the body frame (m).
    pub head_offset: Vec3<T>,
}

impl<T: Real> Default for GuidanceParams<T> {
    fn default() -> Self {
        Self {
            gamma: T::one(),
            u0: T::lit(0.4),
            delta_e: T::lit(5.0),
            mu: T::one(),
            k_c: T::lit(0.015),
            head_offset: Vec3::new(T::lit(0.8), T::zero(), T::zero()),
        }
    }
}

impl<T: Real> GuidanceParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma", self.gamma),
            ("u0", self.u0),
            ("delta_e", self.delta_e),
            ("mu", self.mu),
            ("k_c", self.k_c),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        if !self.head_offset.is_finite() {
            return Err(Error::InvalidParameter("head offset is not finite".into()));
        }
        ActuationMap::new(self.head_offset).map(|_| ())
    }
}

/// Follow the vehicle position (`Basic`) or its head point and emit body commands (`Extended`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidanceMode {
    Basic,
    Extended,
}

/// Surge speed and pitch/yaw rate commands.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyCommand<T> {
    pub u_rd: T,
    pub wy: T,
    pub wz: T,
}

/// `(chi_r, nu_r, delta_h)`: approach angles and the vertical lookahead.
pub fn approach_angles<T: Real>(e: T, h: T, delta_e: T, mu: T) -> (T, T, T) {
    let chi_r = (-e / delta_e).atan();
    let delta_h = mu * delta_e.hypot(e);
    let nu_r = (h / delta_h).atan();
    (chi_r, nu_r, delta_h)
}

/// Desired azimuth and elevation: the approach direction `(chi_r, nu_r)`
/// carried into the navigation frame by the path rotation.
pub fn desired_angles<T: Real>(chi_p: T, nu_p: T, chi_r: T, nu_r: T) -> Result<(T, T)> {
    let (scp, ccp) = chi_p.sin_cos();
    let (snp, cnp) = nu_p.sin_cos();
    let (scr, ccr) = chi_r.sin_cos();
    let (snr, cnr) = nu_r.sin_cos();
    let a = cnp * cnr * ccr - snp * snr;
    let b = cnr * scr;
    let x_num = scp * a + ccp * b;
    let x_den = ccp * a - scp * b;
    let mut arg = snp * ccr * cnr + cnp * snr;
    if arg.abs() > T::one() {
        if arg.abs() - T::one() > T::lit(1e-12) {
            return Err(Error::Domain(arg.as_f64()));
        }
        arg = arg.signum();
    }
    Ok((x_num.atan2(x_den), arg.asin()))
}

/// Commanded speed, `U_0` on the path and growing with the lateral/vertical error.
pub fn desired_speed<T: Real>(e: T, h: T, u0: T, delta_e: T, mu: T) -> T {
    u0 / (mu * delta_e) * (mu * mu * (delta_e * delta_e + e * e) + h * h).sqrt()
}

/// Rate of the path parameter, `(U_d cos chi_r cos nu_r + gamma s) / sigma`.
pub fn parameter_rate<T: Real>(u_d: T, chi_r: T, nu_r: T, gamma: T, s: T, sigma: T) -> Result<T> {
    if !(sigma > T::zero()) {
        return Err(Error::InvalidSpline(sigma.as_f64()));
    }
    Ok((u_d * chi_r.cos() * nu_r.cos() + gamma * s) / sigma)
}

/// Second derivative of the current estimate, `k_c (eta_f - eta_p)`.
pub fn estimator_accel<T: Real>(follow: Vec3<T>, eta_p: Vec3<T>, k_c: T) -> Vec3<T> {
    (follow - eta_p) * k_c
}

/// Closed-form derivative of the track-error part of the Lyapunov function,
/// `-gamma s^2 - (U_0/Delta_e) e^2 - (U_0/(mu Delta_e)) h^2`.
pub fn track_lyapunov_rate<T: Real>(err: TrackError<T>, p: &GuidanceParams<T>) -> T {
    -(p.gamma * err.s * err.s)
        - p.u0 / p.delta_e * err.e * err.e
        - p.u0 / (p.mu * p.delta_e) * err.h * err.h
}

/// Linear map from `(u, wy, wz)` to the body-frame head velocity
/// `v - O_h x w` with zero sway, heave and roll, and its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuationMap<T> {
    pub p: [[T; 3]; 3],
    pub p_inv: [[T; 3]; 3],
}

impl<T: Real> ActuationMap<T> {
    pub fn new(o: Vec3<T>) -> Result<Self> {
        if o.x.abs() <= T::lit(1e-12) {
            return Err(Error::SingularMapping);
        }
        let (z, one) = (T::zero(), T::one());
        let p = [[one, o.z, -o.y], [z, z, o.x], [z, -o.x, z]];
        let r = one / o.x;
        let p_inv = [[one, o.y * r, o.z * r], [z, z, -r], [z, r, z]];
        Ok(Self { p, p_inv })
    }

    fn apply(m: &[[T; 3]; 3], v: Vec3<T>) -> Vec3<T> {
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn forward(&self, c: BodyCommand<T>) -> Vec3<T> {
        Self::apply(&self.p, Vec3::new(c.u_rd, c.wy, c.wz))
    }

    pub fn inverse(&self, v: Vec3<T>) -> BodyCommand<T> {
        let c = Self::apply(&self.p_inv, v);
        BodyCommand { u_rd: c.x, wy: c.y, wz: c.z }
    }
}

/// Body commands realising the navigation-frame head velocity
/// `eta_d_dot - c_hat` for attitude `q`.
pub fn body_commands<T: Real>(
    q: Quaternion<T>,
    eta_d_dot: Vec3<T>,
    c_hat: Vec3<T>,
    map: &ActuationMap<T>,
) -> BodyCommand<T> {
    map.inverse(q.rotate_inverse(eta_d_dot - c_hat))
}

/// Navigation-frame position of the head point.
pub fn head_position<T: Real>(eta: Vec3<T>, q: Quaternion<T>, offset: Vec3<T>) -> Vec3<T> {
    eta + q.rotate(offset)
}

/// What the guidance law needs to know about the vehicle at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceInput<T> {
    pub eta: Vec3<T>,
    pub q: Quaternion<T>,
    pub u: T,
    pub c_hat: Vec3<T>,
    /// Azimuth of the previous evaluation, for unwrapping and vertical tangents.
    pub prev_chi: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceOutput<T> {
    pub eta_d_dot: Vec3<T>,
    pub u_dot: T,
    pub body_cmd: Option<BodyCommand<T>>,
    pub c_hat_ddot: Option<Vec3<T>>,
    pub follow: Vec3<T>,
    pub eta_p: Vec3<T>,
    pub sigma: T,
    pub frame: PathFrame<T>,
    pub error: TrackError<T>,
    pub chi_r: T,
    pub nu_r: T,
    pub chi_d: T,
    pub nu_d: T,
    pub u_d: T,
}

/// Evaluate the guidance law once.
pub fn guidance_step<T: Real>(
    mode: GuidanceMode,
    input: &GuidanceInput<T>,
    spline: &PHSpline<T>,
    params: &GuidanceParams<T>,
) -> Result<GuidanceOutput<T>> {
    let follow = match mode {
        GuidanceMode::Basic => input.eta,
        GuidanceMode::Extended => head_position(input.eta, input.q, params.head_offset),
    };
    // outside the knot range the path continues along its end tangents
    let frame = PathFrame::from_tangent(spline.hodograph_extended(input.u), input.prev_chi)?;
    let eta_p = spline.eval_extended(input.u);
    let error = frame.to_path(follow - eta_p);
    let (chi_r, nu_r, _) = approach_angles(error.e, error.h, params.delta_e, params.mu);
    let (chi_d, nu_d) = desired_angles(frame.chi, frame.nu, chi_r, nu_r)?;
    let u_d = desired_speed(error.e, error.h, params.u0, params.delta_e, params.mu);
    let sigma = spline.speed_extended(input.u);
    let u_dot = parameter_rate(u_d, chi_r, nu_r, params.gamma, error.s, sigma)?;
    let eta_d_dot = direction(chi_d, nu_d) * u_d;
    let (body_cmd, c_hat_ddot) = match mode {
        GuidanceMode::Basic => (None, None),
        GuidanceMode::Extended => {
            let map = ActuationMap::new(params.head_offset)?;
            (
                Some(body_commands(input.q, eta_d_dot, input.c_hat, &map)),
                Some(estimator_accel(follow, eta_p, params.k_c)),
            )
        }
    };
    Ok(GuidanceOutput {
        eta_d_dot,
        u_dot,
        body_cmd,
        c_hat_ddot,
        follow,
        eta_p,
        sigma,
        frame,
        error,
        chi_r,
        nu_r,
        chi_d,
        nu_d,
        u_d,
    })
}
