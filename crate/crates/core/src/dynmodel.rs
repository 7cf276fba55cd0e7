//! Rigid-body plus added-mass dynamics of a torpedo-shaped vehicle in the
//! body frame, `M nu_dot + C(nu) nu + D(nu) nu + g(Q) = tau`, and the
//! model-based surge/pitch/yaw velocity controller.

use std::path::Path;

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::vec3::Vec3;

pub type Vector6f = Vector6<f64>;
pub type Matrix6f = Matrix6<f64>;

pub const GENERIC_TORPEDO_JSON: &str = include_str!("../models/generic_torpedo.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Restoring {
    /// Weight (N).
    #[serde(rename = "W")]
    pub weight: f64,
    /// Buoyancy (N).
    #[serde(rename = "B")]
    pub buoyancy: f64,
    /// Centre of gravity, body frame (m).
    pub rg: [f64; 3],
    /// Centre of buoyancy, body frame (m).
    pub rb: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThrustLimits {
    #[serde(rename = "surge_N")]
    pub surge_n: f64,
    #[serde(rename = "pitch_Nm")]
    pub pitch_nm: f64,
    #[serde(rename = "yaw_Nm")]
    pub yaw_nm: f64,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default)]
    pub name: String,
    pub M: [[f64; 6]; 6],
    pub D_lin: [[f64; 6]; 6],
    pub D_quad: [[f64; 6]; 6],
    pub restoring: Restoring,
    pub limits: ThrustLimits,
}

/// Validated model. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicModel {
    pub name: String,
    pub mass: Matrix6f,
    mass_inv: Matrix6f,
    pub d_lin: Matrix6f,
    /// Diagonal of the quadratic damping, multiplied by `|nu_i|`.
    pub d_quad: Vector6f,
    pub restoring: Restoring,
    pub limits: ThrustLimits,
}

fn mat6(a: &[[f64; 6]; 6]) -> Matrix6f {
    Matrix6f::from_fn(|i, j| a[i][j])
}

fn to_rows(m: &Matrix6f) -> [[f64; 6]; 6] {
    let mut a = [[0.0; 6]; 6];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    a
}

impl DynamicModel {
    pub fn from_file(f: ModelFile) -> Result<Self> {
        let mass = mat6(&f.M);
        let d_lin = mat6(&f.D_lin);
        let dq = mat6(&f.D_quad);
        let all = f.M.iter().chain(&f.D_lin).chain(&f.D_quad).flatten();
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::Config("model matrices must be finite".into()));
        }
        let asym = (mass - mass.transpose()).amax();
        if asym > 1e-9 * mass.amax().max(1.0) {
            return Err(Error::Config(format!("M is not symmetric (max |M - M^T| = {asym:e})")));
        }
        let chol = mass
            .cholesky()
            .ok_or_else(|| Error::Config("M is not positive definite".into()))?;
        let sym_d = (d_lin + d_lin.transpose()) * 0.5;
        if sym_d.symmetric_eigenvalues().min() < -1e-12 {
            return Err(Error::Config("D_lin is not dissipative".into()));
        }
        let off_diag = (0..6).flat_map(|i| (0..6).map(move |j| (i, j))).filter(|(i, j)| i != j);
        if off_diag.into_iter().any(|(i, j)| dq[(i, j)] != 0.0) || dq.diagonal().min() < 0.0 {
            return Err(Error::Config("D_quad must be diagonal and nonnegative".into()));
        }
        let r = &f.restoring;
        if !(r.weight >= 0.0 && r.buoyancy >= 0.0) {
            return Err(Error::Config("weight and buoyancy must be nonnegative".into()));
        }
        let l = &f.limits;
        if !(l.surge_n > 0.0 && l.pitch_nm > 0.0 && l.yaw_nm > 0.0) {
            return Err(Error::Config("thrust limits must be positive".into()));
        }
        Ok(Self {
            name: f.name,
            mass,
            mass_inv: chol.inverse(),
            d_lin,
            d_quad: dq.diagonal(),
            restoring: f.restoring,
            limits: f.limits,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(s)?;
        Self::from_file(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn generic_torpedo() -> Self {
        Self::from_json(GENERIC_TORPEDO_JSON).expect("bundled model is valid")
    }

    pub fn to_file(&self) -> ModelFile {
        let mut dq = Matrix6f::zeros();
        dq.set_diagonal(&self.d_quad);
        ModelFile {
            name: self.name.clone(),
            M: to_rows(&self.mass),
            D_lin: to_rows(&self.d_lin),
            D_quad: to_rows(&dq),
            restoring: self.restoring,
            limits: self.limits,
        }
    }

    pub fn mass_inverse(&self) -> &Matrix6f {
        &self.mass_inv
    }

    /// `D(nu) nu = D_lin nu + D_quad (|nu| .* nu)`.
    pub fn damping_force(&self, nu: &Vector6f) -> Vector6f {
        self.d_lin * nu + self.d_quad.component_mul(&nu.abs()).component_mul(nu)
    }

    /// Restoring generalized force from weight and buoyancy at attitude `q`.
    pub fn restoring_force(&self, q: Quaternion<f64>) -> Vector6f {
        let r = &self.restoring;
        let down = q.rotate_inverse(Vec3::new(0.0, 0.0, 1.0));
        let gb = Vector3::new(down.x, down.y, down.z);
        let fg = gb * r.weight;
        let fb = -gb * r.buoyancy;
        let rg = Vector3::from(r.rg);
        let rb = Vector3::from(r.rb);
        let f = -(fg + fb);
        let m = -(rg.cross(&fg) + rb.cross(&fb));
        Vector6f::new(f.x, f.y, f.z, m.x, m.y, m.z)
    }

    pub fn kinetic_energy(&self, nu: &Vector6f) -> f64 {
        0.5 * nu.dot(&(self.mass * nu))
    }
}

fn skew(a: Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Coriolis and centripetal matrix built from the (symmetric part of the) inertia.
pub fn coriolis(mass: &Matrix6f, nu: &Vector6f) -> Matrix6f {
    let m = (mass + mass.transpose()) * 0.5;
    let m11 = m.fixed_view::<3, 3>(0, 0);
    let m12 = m.fixed_view::<3, 3>(0, 3);
    let m21 = m.fixed_view::<3, 3>(3, 0);
    let m22 = m.fixed_view::<3, 3>(3, 3);
    let v1 = nu.fixed_rows::<3>(0);
    let v2 = nu.fixed_rows::<3>(3);
    let a = skew(m11 * v1 + m12 * v2);
    let b = skew(m21 * v1 + m22 * v2);
    let mut c = Matrix6f::zeros();
    c.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-a));
    c.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-a));
    c.fixed_view_mut::<3, 3>(3, 3).copy_from(&(-b));
    c
}

/// Body-frame acceleration, `M^-1 (tau - C(nu) nu - D(nu) nu - g(Q))`.
pub fn dynamics_deriv(model: &DynamicModel, nu: &Vector6f, q: Quaternion<f64>, tau: &Vector6f) -> Vector6f {
    let rhs = tau - coriolis(&model.mass, nu) * nu - model.damping_force(nu) - model.restoring_force(q);
    model.mass_inv * rhs
}

/// Diagonal proportional gains of the velocity controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerGains {
    pub kp: [f64; 6],
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self { kp: [20.0, 0.0, 0.0, 0.0, 10.0, 10.0] }
    }
}

impl ControllerGains {
    pub fn validate(&self) -> Result<()> {
        if self.kp.iter().any(|k| !(*k >= 0.0 && k.is_finite())) {
            return Err(Error::Config("controller gains must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerOutput {
    /// Before zeroing and saturation.
    pub raw: Vector6f,
    /// Applied: `(tau_x, 0, 0, 0, tau_p, tau_r)` within the limits.
    pub tau: Vector6f,
    pub saturated: bool,
}

/// `tau = M K_p (nu_d - nu) + C(nu) nu + D(nu_d) nu_d`, restricted to the
/// actuated surge, pitch and yaw axes and clipped to the thrust limits.
pub fn controller(model: &DynamicModel, gains: &ControllerGains, nu: &Vector6f, nu_d: &Vector6f) -> ControllerOutput {
    let kp = Vector6f::from(gains.kp);
    let e = nu_d - nu;
    let raw = model.mass * kp.component_mul(&e) + coriolis(&model.mass, nu) * nu + model.damping_force(nu_d);
    let l = &model.limits;
    let clip = |v: f64, lim: f64| v.clamp(-lim, lim);
    let tau = Vector6f::new(
        clip(raw[0], l.surge_n),
        0.0,
        0.0,
        0.0,
        clip(raw[4], l.pitch_nm),
        clip(raw[5], l.yaw_nm),
    );
    let saturated = tau[0] != raw[0] || tau[4] != raw[4] || tau[5] != raw[5];
    ControllerOutput { raw, tau, saturated }
}

/// Desired 6-vector `(u_rd, 0, 0, 0, wy, wz)`.
pub fn desired_body_velocity(u_rd: f64, wy: f64, wz: f64) -> Vector6f {
    Vector6f::new(u_rd, 0.0, 0.0, 0.0, wy, wz)
}
