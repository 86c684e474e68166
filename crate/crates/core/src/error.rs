//! Error type shared by every solver in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DisplaceError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DisplaceError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// All candidate pivots at `step` fell below the degeneracy tolerance.
    #[error("singular pivot at step {step}: |pivot| = {magnitude:e} <= tolerance {tolerance:e}")]
    SingularPivot {
        step: usize,
        magnitude: f64,
        tolerance: f64,
    },

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("node collision: t[{row}] == s[{col}]")]
    NodeCollision { row: usize, col: usize },

    #[error("singular generator transform: {0}")]
    SingularTransform(String),

    #[error("matrix is not positive definite (step {step}: {detail})")]
    NotPositiveDefinite { step: usize, detail: String },

    #[error("imaginary leak: |Im x| = {leak:e} exceeds {threshold:e}")]
    ImaginaryLeak { leak: f64, threshold: f64 },

    #[error("rank deficient: Cholesky pivot {pivot:e} at column {column}")]
    RankDeficient { column: usize, pivot: f64 },

    #[error("iterative refinement failed to reduce the residual ({0})")]
    NoConvergence(String),

    #[error(
        "no method reached the requested tolerance {tol:e}; best normalized residual {best:e}"
    )]
    UnsolvedWithinTolerance { tol: f64, best: f64 },

    #[error("could not generate a matrix with the requested condition number: {0}")]
    FamilyGenerationFailure(String),

    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
}

impl DisplaceError {
    /// Stable machine-readable name, used by the CLI and in reports.
    pub fn name(&self) -> &'static str {
        match self {
            DisplaceError::DimensionMismatch(_) => "DimensionMismatch",
            DisplaceError::InvalidInput(_) => "InvalidInput",
            DisplaceError::SingularPivot { .. } => "SingularPivot",
            DisplaceError::SingularMatrix(_) => "SingularMatrix",
            DisplaceError::NodeCollision { .. } => "NodeCollision",
            DisplaceError::SingularTransform(_) => "SingularTransform",
            DisplaceError::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            DisplaceError::ImaginaryLeak { .. } => "ImaginaryLeak",
            DisplaceError::RankDeficient { .. } => "RankDeficient",
            DisplaceError::NoConvergence(_) => "NoConvergence",
            DisplaceError::UnsolvedWithinTolerance { .. } => "UnsolvedWithinTolerance",
            DisplaceError::FamilyGenerationFailure(_) => "FamilyGenerationFailure",
            DisplaceError::ParseError { .. } => "ParseError",
        }
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        DisplaceError::DimensionMismatch(msg.into())
    }
}
