use thiserror::Error;

use crate::linsolve::FarkasCertificate;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("constraint set is empty")]
    Infeasible(Box<FarkasCertificate>),

    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("no fixed point found: residual {residual:e} exceeds {tolerance:e}")]
    NoFixedPointFound { residual: f64, tolerance: f64 },

    #[error("certificate program failed: best value {value:e} < -{epsilon:e}")]
    CertificateNotFound { value: f64, epsilon: f64 },

    #[error("iteration cap {0} exceeded")]
    IterationCapExceeded(usize),

    #[error("structure violation: {0}")]
    StructureViolation(String),

    #[error("precondition not verified: {0}")]
    PreconditionUnverified(String),

    #[error("parse error: {0}")]
    ParseError(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::DimensionMismatch(format!(
            "{what}: got {got}, expected {want}"
        )));
    }
    Ok(())
}
