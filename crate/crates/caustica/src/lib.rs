//! Geodesic string and area constructions on surfaces of constant curvature.
//!
//! The crate implements, numerically:
//!
//! * geodesic primitives on the Euclidean plane, the unit sphere, the
//!   hyperbolic (Poincaré disk) plane, and general metric charts
//!   ([`surface`]);
//! * convex curves with arclength, geodesic curvature, tangent geodesics, and
//!   the curvature^(2/3) parameter ([`curve`]);
//! * the string construction around a convex curve, the maps it induces on
//!   the curve, and checks for the existence of an invariant parameter in
//!   which those maps are translations ([`strings`]);
//! * billiard ball maps near the boundary, their small-angle normal form, and
//!   quantitative orbit bounds ([`billiard`]);
//! * outer (dual) billiards and the area construction ([`outer`]);
//! * Ceva-type incidence tests with the circle-length weight psi
//!   ([`incidence`]);
//! * reconstruction of a curve from a 4-jet by the defect ODE that
//!   characterizes curves admitting the invariant string parameter ([`jet`]).
//!
//! The [`cli`] module backs the `caustica` binary; [`acceptance`] bundles the
//! end-to-end checks run by `caustica verify-all` and the acceptance test
//! suite.

pub mod error;
pub mod numerics;
pub mod vec3;

pub mod acceptance;
pub mod billiard;
pub mod cli;
pub mod conic;
pub mod curve;
pub mod incidence;
pub mod jet;
pub mod outer;
pub mod strings;
pub mod surface;

pub use error::{Error, Result};
pub use vec3::V3;

/// Entry point used by the `caustica` binary; returns the process exit code.
pub fn run_cli() -> i32 {
    cli::run(std::env::args_os())
}
