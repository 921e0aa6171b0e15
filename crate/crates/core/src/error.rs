use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall into two families: input errors (bad shapes, values outside
/// an operation's domain, unmet hypotheses) and internal-consistency errors
/// (two independent computations disagree, or a certificate fails).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: String,
        found: String,
    },
    #[error("non-finite entry in {0}")]
    NonFinite(String),
    #[error("matrix is not Hermitian (relative asymmetry {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is indefinite beyond tolerance (smallest eigenvalue {min_eigenvalue:.3e})")]
    Indefinite { min_eigenvalue: f64 },
    #[error("subspace is degenerate (its Gram matrix is singular)")]
    DegenerateSubspace,
    #[error("eigenvalue {eigenvalue} lies within tolerance of the unit circle")]
    SpectralAmbiguity { eigenvalue: Complex64 },
    #[error("I - zA is numerically singular at z = {z}; nearest reciprocal eigenvalue {nearest}")]
    PoleProximity { z: Complex64, nearest: Complex64 },
    #[error("Hankel rank did not stabilize: {0}")]
    OrderAmbiguity(String),
    #[error("operator is not a contraction (metric defect eigenvalue {min_eigenvalue:.3e})")]
    NotContraction { min_eigenvalue: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is singular: {0}")]
    Singular(String),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("certificate failed for {what} (residual {residual:.3e})")]
    Certification { what: String, residual: f64 },
    #[error("internal consistency failure: {0}")]
    Inconsistency(String),
}

impl Error {
    pub(crate) fn dims(context: &str, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            context: context.to_string(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// True for errors caused by the caller's input rather than by a failed
    /// cross-check inside the library.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::Certification { .. } | Error::Inconsistency(_) | Error::NoConvergence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
