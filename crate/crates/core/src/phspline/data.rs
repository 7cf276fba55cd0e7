use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Parameterization of the interpolation knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnotRule {
    /// `u_k - u_{k-1} = |p_k - p_{k-1}|`, starting at 0.
    #[default]
    Chord,
    /// `u_k = k`.
    Uniform,
}

impl KnotRule {
    pub fn knots<T: Real>(self, points: &[Vec3<T>]) -> Result<Vec<T>> {
        match self {
            KnotRule::Chord => chord_knots(points),
            KnotRule::Uniform => uniform_knots(points.len()),
        }
    }
}

/// Points, derivatives and knots of a first-order Hermite problem.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteData<T> {
    pub points: Vec<Vec3<T>>,
    pub tangents: Vec<Vec3<T>>,
    pub knots: Vec<T>,
}

impl<T: Real> HermiteData<T> {
    pub fn new(points: Vec<Vec3<T>>, tangents: Vec<Vec3<T>>, knots: Vec<T>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Degenerate(format!(
                "need at least two points, got {}",
                points.len()
            )));
        }
        if tangents.len() != points.len() || knots.len() != points.len() {
            return Err(Error::InvalidParameter(format!(
                "{} points, {} tangents and {} knots do not match",
                points.len(),
                tangents.len(),
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("knots must be strictly increasing".into()));
        }
        if let Some(k) = tangents.iter().position(|d| !(d.norm() > T::lit(1e-9))) {
            return Err(Error::Degenerate(format!("tangent {k} is zero")));
        }
        if points.iter().chain(&tangents).any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite Hermite data".into()));
        }
        Ok(Self { points, tangents, knots })
    }

    /// Number of spans.
    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }
}

pub fn chord_knots<T: Real>(points: &[Vec3<T>]) -> Result<Vec<T>> {
    if points.len() < 2 {
        return Err(Error::Degenerate("need at least two points".into()));
    }
    let mut knots = Vec::with_capacity(points.len());
    let mut u = T::zero();
    knots.push(u);
    for (k, w) in points.windows(2).enumerate() {
        let d = (w[1] - w[0]).norm();
        if !(d > T::lit(1e-12)) {
            return Err(Error::Degenerate(format!("points {k} and {} coincide", k + 1)));
        }
        u = u + d;
        knots.push(u);
    }
    Ok(knots)
}

pub fn uniform_knots<T: Real>(n_points: usize) -> Result<Vec<T>> {
    if n_points < 2 {
        return Err(Error::Degenerate("need at least two points".into()));
    }
    Ok((0..n_points).map(|k| T::lit(k as f64)).collect())
}

/// Unit chord directions shared by consecutive pairs: `d_j = d_{j+1} =
/// (p_{j+1} - p_j)/|p_{j+1} - p_j|` for even `j`. A trailing unpaired point
/// takes the direction of the last chord.
pub fn normalized_chord_pairs<T: Real>(points: &[Vec3<T>]) -> Result<Vec<Vec3<T>>> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Degenerate("need at least two points".into()));
    }
    let unit = |a: usize, b: usize| {
        (points[b] - points[a])
            .try_normalize(T::lit(1e-12))
            .ok_or_else(|| Error::Degenerate(format!("points {a} and {b} coincide")))
    };
    let mut out = vec![Vec3::zeros(); n];
    let mut j = 0;
    while j + 1 < n {
        let d = unit(j, j + 1)?;
        out[j] = d;
        out[j + 1] = d;
        j += 2;
    }
    if n % 2 == 1 {
        out[n - 1] = unit(n - 2, n - 1)?;
    }
    Ok(out)
}

/// Derivatives at the knots of the C² cubic spline interpolant with
/// not-a-knot end conditions (each coordinate independently).
///
/// Three points give the interpolating parabola; two give the chord line.
pub fn cubic_spline_tangents<T: Real>(points: &[Vec3<T>], knots: &[T]) -> Result<Vec<Vec3<T>>> {
    let n = points.len();
    if n < 2 || knots.len() != n {
        return Err(Error::Degenerate(
            "cubic spline tangents need matching points and knots (n >= 2)".into(),
        ));
    }
    if knots.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("knots must be strictly increasing".into()));
    }
    let dx: Vec<T> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<Vec3<T>> = points
        .windows(2)
        .zip(&dx)
        .map(|(p, &h)| (p[1] - p[0]) / h)
        .collect();
    if n == 2 {
        return Ok(vec![slope[0], slope[0]]);
    }
    if n == 3 {
        // derivative of the quadratic through the three points
        let (h0, h1) = (dx[0], dx[1]);
        let c = (slope[1] - slope[0]) / (h0 + h1);
        return Ok(vec![
            slope[0] - c * h0,
            slope[0] + c * h0,
            slope[1] + c * h1,
        ]);
    }

    // tridiagonal system sub[i] m[i-1] + diag[i] m[i] + sup[i] m[i+1] = rhs[i]
    let mut sub = vec![T::zero(); n];
    let mut diag = vec![T::zero(); n];
    let mut sup = vec![T::zero(); n];
    let mut rhs = vec![Vec3::zeros(); n];
    let two = T::lit(2.0);
    let three = T::lit(3.0);

    let d0 = knots[2] - knots[0];
    diag[0] = dx[1];
    sup[0] = d0;
    rhs[0] = (slope[0] * ((dx[0] + two * d0) * dx[1]) + slope[1] * (dx[0] * dx[0])) / d0;
    for i in 1..n - 1 {
        sub[i] = dx[i];
        diag[i] = two * (dx[i - 1] + dx[i]);
        sup[i] = dx[i - 1];
        rhs[i] = (slope[i - 1] * dx[i] + slope[i] * dx[i - 1]) * three;
    }
    let dn = knots[n - 1] - knots[n - 3];
    sub[n - 1] = dn;
    diag[n - 1] = dx[n - 3];
    rhs[n - 1] = (slope[n - 3] * (dx[n - 2] * dx[n - 2])
        + slope[n - 2] * ((two * dn + dx[n - 2]) * dx[n - 3]))
        / dn;

    // Thomas elimination
    for i in 1..n {
        let m = sub[i] / diag[i - 1];
        diag[i] = diag[i] - m * sup[i - 1];
        rhs[i] = rhs[i] - rhs[i - 1] * m;
    }
    let mut out = vec![Vec3::zeros(); n];
    out[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = (rhs[i] - out[i + 1] * sup[i]) / diag[i];
    }
    Ok(out)
}
