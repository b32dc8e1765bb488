use thiserror::Error;

/// Errors raised by the reduction library.
///
/// Magnitudes are reported as `f64` so the error type does not depend on the
/// scalar parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid structure constants: {0}")]
    InvalidAlgebra(String),
    #[error("algebra `{0}` has no matrix realization")]
    NoRealization(String),
    #[error("group element violates its defining constraint (defect {0:e})")]
    NotInGroup(f64),
    #[error("subspace is not a subalgebra (bracket defect {0:e})")]
    NotSubalgebra(f64),
    #[error("stabilizer admits no ad-stable complement (residual {residual:e})")]
    NonReductiveStabilizer { residual: f64 },
    #[error("complement S~ rejected: {0}")]
    AssumptionTwoFailure(String),
    #[error("symplectic Gram matrix is numerically singular (singular value ratio {0:e})")]
    SingularOmega(f64),
    #[error("pairing between S~ and the radical is degenerate (singular value ratio {0:e})")]
    DegeneratePairing(f64),
    #[error("radical is not isotropic (defect {0:e})")]
    NonIsotropicRadical(f64),
    #[error("point is off the constraint manifold (distance {0:e})")]
    PointOffConstraint(f64),
    #[error("quotient differential restricted to W1 is singular (singular value ratio {0:e})")]
    SingularProjection(f64),
    #[error("orbit chart loses rank (singular value ratio {0:e})")]
    RankLoss(f64),
    #[error("vector is not tangent to the orbit (residual {0:e})")]
    NotTangent(f64),
    #[error("reduced manifold is zero-dimensional")]
    ZeroDimensionalBase,
    #[error("invalid quadrature rule: {0}")]
    InvalidQuadrature(String),
    #[error("json: {0}")]
    Json(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
