//! Error type shared by all engine modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point outside the metric's domain: {0}")]
    OutsideDomain(String),

    #[error("matrix is not Hermitian positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("analytic derivatives requested but the field does not supply them")]
    MissingAnalyticDerivatives,

    #[error("derivative step {0:e} is not usable (must be positive, finite and not underflow)")]
    BadStep(f64),

    #[error("zero direction vector")]
    ZeroVector,

    #[error("{what} has imaginary residue {residue:.3e} above the limit {limit:.3e}")]
    ImaginaryResidue {
        what: &'static str,
        residue: f64,
        limit: f64,
    },

    #[error("quartic-form evaluator is inconsistent with a Kahler-symmetric tensor (residual {0:.3e})")]
    InconsistentEvaluator(f64),

    #[error("input metric is not Gauduchon on this grid (residual {residual:.3e} > {tol:.3e})")]
    NotGauduchon { residual: f64, tol: f64 },

    #[error("conformal factor out of bounds: {0}")]
    FactorBounds(String),

    #[error("linear solver did not converge: residual {residual:.3e} after {iterations} iterations (tol {tol:.3e})")]
    SolverDiverged {
        residual: f64,
        iterations: usize,
        tol: f64,
    },

    #[error("computed null vector is sign-indefinite (discretization failure)")]
    IndefiniteNullVector,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, GeomError>;
