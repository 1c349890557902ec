//! Entire radial solutions of the prescribed Gaussian curvature equation
//!
//! ```text
//!     -Δu = (1 - |x|^p) e^{2u}   in R²
//! ```
//!
//! The crate integrates the radial ODE in logarithmic radius, shoots on the
//! central height `u(0)` to prescribe the total curvature `Λ`, and checks the
//! computed profiles against the Pohozaev identity, the far-field law, the
//! Kelvin transform, spherical blow-up and the regularized continuation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod continuation;
pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod model;
pub mod quadrature;
pub mod rootfind;
pub mod shooting;

mod ode;

pub use error::{Error, Result};
pub use integrator::{integrate, resample, series_start, IntegratorControls, Node, RadialProfile, Status};
pub use shooting::{lambda_of_u0, solve_for_lambda, sweep, ShootingResult, SolverOptions};
pub use model::{eval_curvature, window, CurvatureKind, CurvatureSpec, Window, LAMBDA_SPH};

/// Version tag written into every serialized profile and result document.
pub const FORMAT_VERSION: &str = "1.0.0";
