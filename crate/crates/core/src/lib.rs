//! Comparison geometry for metric measure spaces with variable lower curvature bounds.
//!
//! The crate is organised bottom-up:
//!
//! * [`comparison_ode`] solves `v'' + κ v = 0` for a sampled curvature profile and
//!   evaluates the distortion coefficients `σ` and `τ` built from it.
//! * [`one_dim_bounds`] holds the Riccati comparison function `ψ`, the explicit
//!   constants `C'`, `C`, `Λ` and checkers for the one-dimensional estimates.
//! * [`mm_core`] models finite and one-dimensional metric measure spaces, integral
//!   curvature excess and the fixture generators.
//! * [`transport`] is exact discrete optimal transport, displacement interpolation,
//!   Rényi entropy and the distance surrogates between spaces.
//! * [`cd_verify`] checks the displacement-convexity, Brunn–Minkowski,
//!   Bishop–Gromov and measure-contraction inequalities end to end and runs the
//!   cusp-sequence convergence experiment.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cd_verify;
pub mod comparison_ode;
mod error;
mod ext;
pub mod integrate;
pub mod mm_core;
pub mod one_dim_bounds;
pub mod quadrature;
pub mod report;
pub mod transport;

pub use comparison_ode::{CurvatureProfile, SinSolution};
pub use error::{Error, Result};
pub use ext::ExtReal;

pub use mm_core::{FiniteMmSpace, OneDimMmSpace};
pub use report::{Tolerance, VerificationReport, DEFAULT_TOL};
pub use transport::{Coupling, DiscreteMeasure, DynamicalPlan1D, PlanGeodesic};
