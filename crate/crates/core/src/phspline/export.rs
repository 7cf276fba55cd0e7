use std::path::Path;

use serde::{Deserialize, Serialize};

use super::segment::PHQuinticSegment;
use super::spline::PHSpline;
use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::scalar::Real;
use crate::vec3::Vec3;

pub const SPLINE_FORMAT: &str = "ph-quintic-spline/1";

/// One span as written to disk. Quaternions are `[w, x, y, z]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentExport {
    pub u_start: f64,
    pub u_end: f64,
    pub h: f64,
    pub preimage: [[f64; 4]; 3],
    pub w_axis: [f64; 3],
    pub control_points: [[f64; 3]; 6],
    pub sigma: [f64; 5],
    pub angles: [f64; 2],
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineExport {
    pub format: String,
    pub knots: Vec<f64>,
    pub cumulative_lengths: Vec<f64>,
    pub total_length: f64,
    pub segments: Vec<SegmentExport>,
}

impl SplineExport {
    pub fn from_spline<T: Real>(spline: &PHSpline<T>) -> Self {
        let segments = spline
            .segments()
            .iter()
            .map(|s| SegmentExport {
                u_start: s.u_start.as_f64(),
                u_end: s.u_end().as_f64(),
                h: s.h.as_f64(),
                preimage: s.preimage.map(|q| q.to_f64()),
                w_axis: s.w_axis.to_f64(),
                control_points: s.control_points.map(|p| p.to_f64()),
                sigma: s.sigma.map(|v| v.as_f64()),
                angles: [s.angles.0.as_f64(), s.angles.1.as_f64()],
                length: s.length.as_f64(),
            })
            .collect();
        Self {
            format: SPLINE_FORMAT.to_string(),
            knots: spline.knots().iter().map(|k| k.as_f64()).collect(),
            cumulative_lengths: spline.cumulative_lengths().iter().map(|k| k.as_f64()).collect(),
            total_length: spline.total_length().as_f64(),
            segments,
        }
    }

    /// Rebuild the spline from the stored preimages; control points are
    /// recomputed and checked against the stored ones.
    pub fn to_spline(&self) -> Result<PHSpline<f64>> {
        if self.format != SPLINE_FORMAT {
            return Err(Error::Config(format!("unknown spline format '{}'", self.format)));
        }
        let mut segs = Vec::with_capacity(self.segments.len());
        for (k, s) in self.segments.iter().enumerate() {
            let seg = PHQuinticSegment::from_preimage(
                s.preimage.map(Quaternion::from_f64),
                Vec3::from_f64(s.w_axis),
                Vec3::from_f64(s.control_points[0]),
                s.u_start,
                s.h,
                (s.angles[0], s.angles[1]),
            );
            let scale = s.control_points.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
            let drift = seg
                .control_points
                .iter()
                .zip(&s.control_points)
                .map(|(a, b)| (*a - Vec3::from_f64(*b)).max_abs())
                .fold(0.0, f64::max);
            if drift > 1e-9 * scale {
                return Err(Error::Config(format!(
                    "segment {k}: control points inconsistent with preimage ({drift:e})"
                )));
            }
            segs.push(seg);
        }
        PHSpline::from_segments(segs)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
