//! Zonal Minkowski valuations of convex bodies and the isoperimetric and
//! Sobolev-type inequalities they satisfy, checked numerically.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the CLI and reports use.

pub mod bodies;
pub mod error;
pub mod hull;
pub mod inequalities;
pub mod linalg;
pub mod scalar;
pub mod sobolev;
pub mod special;
pub mod sphere_quad;
pub mod valuations;
pub mod zonal;

pub use error::{IsovalError, Result};
pub use scalar::Real;

/// Version tag carried by every serialized report.
pub const SCHEMA: &str = "isoval/1";

pub type Body = bodies::Body<f64>;
pub type SurfaceMeasure = bodies::SurfaceMeasure<f64>;
pub type SupportField = bodies::SupportField<f64>;
pub type SphericalGrid = sphere_quad::SphericalGrid<f64>;
pub type UnitVector = sphere_quad::UnitVector<f64>;
pub type Rotation = sphere_quad::Rotation<f64>;
pub type Matrix = linalg::Matrix<f64>;
pub type ZonalMeasure = zonal::ZonalMeasure<f64>;
