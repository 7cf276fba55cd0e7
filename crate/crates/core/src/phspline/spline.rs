use super::data::HermiteData;
use super::segment::{hermite_segment_with, AngleCriterion, PHQuinticSegment};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Where a global parameter value falls on the spline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamLocation<T> {
    pub segment: usize,
    pub xi: T,
    /// Set when the query lay outside `[u_0, u_N]` and was clamped.
    pub clamped: bool,
}

/// Ordered PH quintic spans sharing knots; immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PHSpline<T> {
    segments: Vec<PHQuinticSegment<T>>,
    knots: Vec<T>,
    cumulative: Vec<T>,
}

impl<T: Real> PHSpline<T> {
    pub fn from_segments(segments: Vec<PHQuinticSegment<T>>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| Error::Degenerate("spline needs at least one segment".into()))?;
        let mut knots = vec![first.u_start];
        let mut cumulative = vec![T::zero()];
        for (k, seg) in segments.iter().enumerate() {
            let prev = *knots.last().unwrap();
            let tol = T::lit(1e-9) * prev.abs().max(T::one());
            if (seg.u_start - prev).abs() > tol || !(seg.h > T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "segment {k} does not continue the knot sequence"
                )));
            }
            knots.push(seg.u_end());
            cumulative.push(*cumulative.last().unwrap() + seg.length);
        }
        Ok(Self { segments, knots, cumulative })
    }

    pub fn segments(&self) -> &[PHQuinticSegment<T>] {
        &self.segments
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// Arc length from `u_0` up to each knot.
    pub fn cumulative_lengths(&self) -> &[T] {
        &self.cumulative
    }

    pub fn total_length(&self) -> T {
        *self.cumulative.last().unwrap()
    }

    pub fn u_start(&self) -> T {
        self.knots[0]
    }

    pub fn u_end(&self) -> T {
        *self.knots.last().unwrap()
    }

    pub fn locate(&self, u: T) -> ParamLocation<T> {
        let n = self.segments.len();
        if !(u >= self.u_start()) {
            return ParamLocation { segment: 0, xi: T::zero(), clamped: true };
        }
        if u > self.u_end() {
            return ParamLocation { segment: n - 1, xi: T::one(), clamped: true };
        }
        // first knot strictly greater than u, interior knots belong to the right span
        let idx = self.knots[1..].partition_point(|&k| k <= u).min(n - 1);
        let seg = &self.segments[idx];
        let xi = seg.local(u).max(T::zero()).min(T::one());
        ParamLocation { segment: idx, xi, clamped: false }
    }

    pub fn eval(&self, u: T) -> Vec3<T> {
        let loc = self.locate(u);
        self.segments[loc.segment].point_local(loc.xi)
    }

    /// Derivative of the path with respect to `u`.
    pub fn hodograph(&self, u: T) -> Vec3<T> {
        let loc = self.locate(u);
        self.segments[loc.segment].hodograph_local(loc.xi)
    }

    /// Parametric speed `sigma(u) = |eta_p'(u)|`.
    pub fn speed(&self, u: T) -> T {
        let loc = self.locate(u);
        self.segments[loc.segment].speed_local(loc.xi)
    }

    /// Position continued along the end tangents outside `[u_0, u_N]`, so
    /// that `eval_extended` and `hodograph_extended` stay consistent for
    /// any `u`.
    pub fn eval_extended(&self, u: T) -> Vec3<T> {
        let (a, b) = (self.u_start(), self.u_end());
        if u < a {
            self.eval(a) + self.hodograph(a) * (u - a)
        } else if u > b {
            self.eval(b) + self.hodograph(b) * (u - b)
        } else {
            self.eval(u)
        }
    }

    /// Hodograph with the same continuation as [`Self::eval_extended`].
    pub fn hodograph_extended(&self, u: T) -> Vec3<T> {
        self.hodograph(u.max(self.u_start()).min(self.u_end()))
    }

    pub fn speed_extended(&self, u: T) -> T {
        self.speed(u.max(self.u_start()).min(self.u_end()))
    }

    /// Arc length from `u_0` to `u` (clamped to the domain).
    pub fn arc_to(&self, u: T) -> T {
        let loc = self.locate(u);
        self.cumulative[loc.segment] + self.segments[loc.segment].arc_length_local(loc.xi)
    }

    pub fn arc_length(&self, u_lo: T, u_hi: T) -> T {
        if u_hi <= u_lo {
            return T::zero();
        }
        self.arc_to(u_hi) - self.arc_to(u_lo)
    }

    /// Remaining length divided by the nominal speed.
    pub fn toa_estimate(&self, u: T, u0: T) -> Result<T> {
        if !(u0 > T::zero()) {
            return Err(Error::InvalidParameter(format!("nominal speed {u0} must be positive")));
        }
        Ok((self.total_length() - self.arc_to(u)) / u0)
    }

    /// Largest relative hodograph mismatch at the interior knots.
    pub fn continuity_mismatch(&self) -> T {
        self.segments
            .windows(2)
            .map(|w| {
                let a = w[0].hodograph_local(T::one());
                let b = w[1].hodograph_local(T::zero());
                (a - b).norm() / a.norm().max(b.norm()).max(T::min_positive_value())
            })
            .fold(T::zero(), T::max)
    }

    /// Largest relative PH residual across segments.
    pub fn ph_residual(&self) -> T {
        self.segments.iter().map(|s| s.ph_residual()).fold(T::zero(), T::max)
    }

    /// Sum of distances between consecutive knot points.
    pub fn chord_length(&self) -> T {
        self.segments
            .iter()
            .map(|s| (s.control_points[5] - s.control_points[0]).norm())
            .fold(T::zero(), |a, b| a + b)
    }
}

/// Interpolate Hermite data span by span, picking the free angles with `criterion`.
pub fn build_spline<T: Real>(data: &HermiteData<T>, criterion: AngleCriterion) -> Result<PHSpline<T>> {
    let mut segments = Vec::with_capacity(data.segments());
    for k in 0..data.segments() {
        let h = data.knots[k + 1] - data.knots[k];
        let seg = hermite_segment_with(
            data.points[k],
            data.points[k + 1],
            data.tangents[k],
            data.tangents[k + 1],
            data.knots[k],
            h,
            criterion,
        )
        .map_err(|e| match e {
            Error::Degenerate(m) => Error::Degenerate(format!("segment {k}: {m}")),
            other => other,
        })?;
        segments.push(seg);
    }
    PHSpline::from_segments(segments)
}
