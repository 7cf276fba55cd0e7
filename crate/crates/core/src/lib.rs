//! Spatial Pythagorean-hodograph spline paths and robust path-following
//! guidance for marine vehicles drifting in a constant current.
//!
//! The geometric and guidance layers are generic over [`Real`] (`f32` or
//! `f64`); the rigid-body model and the simulator work in `f64`.

pub mod cli;
pub mod dynmodel;
pub mod error;
pub mod guidance;
pub mod pathframe;
pub mod phspline;
pub mod quadrature;
pub mod quat;
pub mod scalar;
pub mod scenario;
pub mod sim;
pub mod vec3;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Quaternion = quat::Quaternion<f64>;
pub type Vec3 = vec3::Vec3<f64>;
pub type PHQuinticSegment = phspline::PHQuinticSegment<f64>;
pub type PHSpline = phspline::PHSpline<f64>;
pub type HermiteData = phspline::HermiteData<f64>;
