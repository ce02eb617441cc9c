//! Nonlinear Fokker-Planck equation with spatially inhomogeneous temperature
//! on an interval with no-flux boundaries:
//!
//! ```text
//! f_t = d/dx( b^2/(2D) f d/dx(D log f + phi) ),   (b^2/(2D) f d/dx(D log f + phi)) = 0 on the boundary
//! ```
//!
//! Two independent solvers are provided: a Picard iteration of the
//! linearized solution map on `xi = D log(f / feq) - h0` ([`fixed_point`]),
//! and an explicit conservative finite-volume scheme on `rho = f / feq`
//! ([`fv_oracle`]). [`diagnostics`] evaluates mass, free energy, dissipation
//! and discrete parabolic Hölder norms.
//!
//! All numerics are generic over [`Real`]; the aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod coefficients;
pub mod diagnostics;
pub mod error;
pub mod fixed_point;
pub mod fv_oracle;
pub mod grid;
pub mod linear_parabolic;
pub mod problem;
pub mod scalar;
pub mod trajectory;
pub mod transforms;
pub mod tridiag;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid = grid::Grid1D<f64>;
pub type Field = transforms::Field<f64>;
pub type Trajectory = trajectory::Trajectory<f64>;
pub type CoefficientSet = coefficients::CoefficientSet<f64>;
pub type EquilibriumState = coefficients::EquilibriumState<f64>;
pub type Problem = problem::Problem<f64>;
pub type FluxField = fv_oracle::FluxField<f64>;
pub type FixedPointConfig = fixed_point::FixedPointConfig<f64>;
pub type IterationReport = fixed_point::IterationReport<f64>;
pub type DiagnosticsRecord = diagnostics::DiagnosticsRecord<f64>;
pub type HolderReport = diagnostics::HolderReport<f64>;
