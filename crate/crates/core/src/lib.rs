//! Isoperimetric bubbles in warped products `Y × ℝ` over surfaces of revolution.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod bubble;
pub mod embed;
pub mod error;
pub mod flow;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod scalar;
pub mod spline;
pub mod stability;
pub mod tridiag;

pub use error::{LabError, Result};
pub use scalar::Real;

pub type Profile = profile::PhiProfile<f64>;
pub type Geometry = profile::WarpedGeometry<f64>;
pub type Bubble = bubble::BubbleProfile<f64>;
pub type ProfileF32 = profile::PhiProfile<f32>;
pub type GeometryF32 = profile::WarpedGeometry<f32>;
pub type BubbleF32 = bubble::BubbleProfile<f32>;
