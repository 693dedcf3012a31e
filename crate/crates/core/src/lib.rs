//! Curve shortening flow in the hyperbolic plane, upper half-plane model.
//!
//! - [`hypgeo`]: metric, distance, Möbius isometries, Killing fields, geodesics.
//! - [`curves`]: polygonal curves, geodesic curvature, length, area, Gauss–Bonnet.
//! - [`analytic_flows`]: closed-form solution families and a residual checker.
//! - [`solitons`]: curves that move by a one-parameter isometry subgroup.
//! - [`front_tracking`]: explicit numerical evolver with run diagnostics.
//! - [`intrinsic_pde`]: curvature and pressure equations in the Grayson angle.

pub mod analytic_flows;
pub mod curves;
pub mod error;
pub mod front_tracking;
pub mod hypgeo;
pub mod intrinsic_pde;
pub mod solitons;

pub use curves::{CurveFrame, DiscreteCurve};
pub use error::{Error, Result};
pub use hypgeo::{EucVector, KillingKind, MobiusIsometry, Point};
