//! C¹ spatial Pythagorean-hodograph quintic splines interpolating
//! first-order Hermite data.
//!
//! Each span carries a quadratic quaternion preimage `A(u)` whose product
//! `A w A*` is the hodograph, so the parametric speed `|A|^2` is a quartic
//! polynomial and arc length is available in closed form.

mod bernstein;
mod data;
mod export;
mod segment;
mod spline;

pub use bernstein::{antiderivative_quartic, de_casteljau, product_quartic};
pub use data::{
    chord_knots, cubic_spline_tangents, normalized_chord_pairs, uniform_knots, HermiteData,
    KnotRule,
};
pub use export::{SegmentExport, SplineExport, SPLINE_FORMAT};
pub use segment::{
    hermite_segment, hermite_segment_with, solve_awa, AngleCriterion, PHQuinticSegment,
};
pub use spline::{build_spline, PHSpline, ParamLocation};
