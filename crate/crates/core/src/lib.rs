//! Numerical engine for the Chern-connection geometry of chart-defined
//! Hermitian metrics.
//!
//! The crate computes pointwise curvature data (full curvature tensor,
//! Chern-Ricci form, the two scalar curvatures `s` and `s_hat`, torsion and
//! the codifferential of the metric form), samples and optimizes holomorphic
//! sectional curvature on the unit sphere of a tangent space, averages it
//! against the Fubini-Study measure, and runs the conformal machinery on
//! complex 2-tori: Gauduchon weights and the prescribed-scalar elliptic solve
//! that produces a conformal metric with pointwise-constant rescaled scalar
//! curvature.
//!
//! Layout:
//! - [`calculus`]: Wirtinger derivatives of scalar/matrix fields, analytic or
//!   central-difference with Richardson extrapolation.
//! - [`curvature`]: curvature/torsion tensors and every pointwise quantity,
//!   plus extremal holomorphic sectional curvature search and the
//!   quartic-form polarization that rebuilds a Kahler tensor.
//! - [`manifolds`]: built-in metrics (flat/conformal tori, Hopf surface,
//!   Fubini-Study, potential metrics) and deterministic sampling.
//! - [`quadrature`]: periodic trapezoid grids and Monte Carlo sphere moments.
//! - [`conformal`]: conformal transformations and the two elliptic solves on
//!   the 4-dimensional torus grid.
//! - [`report`]: machine-readable verification reports.

pub mod calculus;
pub mod conformal;
pub mod curvature;
pub mod error;
pub mod linalg;
pub mod manifolds;
pub mod quadrature;
pub mod report;

pub use error::{GeomError, Result};

/// Double-precision complex scalar used throughout the engine.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix alias (metric blocks are small: n is the complex
/// dimension of the chart, typically 1..=3).
pub type CMatrix = nalgebra::DMatrix<C64>;
