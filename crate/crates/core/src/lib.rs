//! Orlicz-integral Gauss curvature of polyhedral pseudo-cones.
//!
//! Given a pointed polyhedral cone `C`, a finite measure `μ` on directions in
//! the interior of `C`, and a positive continuous Orlicz function `ϕ`, the
//! [`solver`] finds a hull-form C-pseudo-cone `K` and a constant `c > 0` with
//! `c · J_ϕ(K, ·) = μ`, and builds further solution pairs over enlarged cones.
//!
//! Module map:
//! - [`cone`]: pointed cones, duals, spherical caps and cap sampling;
//! - [`pseudocone`]: hull and Wulff forms, support and radial functions, copolarity;
//! - [`curvature`]: radial Gauss cells, exact areas, `J_ϕ`, Monte Carlo pullback;
//! - [`functional`]: Orlicz gauges, entropy and its gradient;
//! - [`solver`]: the constrained minimization and the cone-enlargement pipeline.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone;
pub mod curvature;
pub mod error;
pub mod functional;
pub mod linalg;
pub mod pseudocone;
pub mod sampling;
pub mod solver;
pub mod spherical;

pub use cone::{PointedCone, SphericalCap};
pub use curvature::{CurvatureMeasure, MeasureMethod, SphericalCell};
pub use error::{Error, Result};
pub use functional::{OrliczFunction, OrliczGauge, QuadratureGrid};
pub use linalg::Vector;
pub use pseudocone::{HullPseudoCone, WulffPseudoCone};
pub use solver::{DiscreteMeasure, SolveOptions, SolveReport};
