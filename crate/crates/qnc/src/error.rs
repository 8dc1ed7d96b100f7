use thiserror::Error;

/// Errors produced by the library.
///
/// The CLI maps these onto exit codes: input/domain/validation problems
/// exit with 2, numerical failures with 3.
#[derive(Debug, Error)]
pub enum QncError {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument is syntactically valid but unusable.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A requested index or count is out of range.
    #[error("range error: {0}")]
    Range(String),

    /// Matrix dimension exceeds the configured cap.
    #[error("dimension {n} exceeds the configured cap {cap} (set QNC_MAX_N to raise it)")]
    DimensionCap { n: usize, cap: usize },

    /// A character value of zero was encountered where the caller did not
    /// permit zero weights.
    #[error("character value is zero at prime {prime} (divides modulus {modulus}) and zero weights were not permitted")]
    ZeroCharacterWeight { prime: u64, modulus: u64 },

    /// A supplied basis is not orthonormal to the required tolerance.
    #[error("basis fails orthonormality check: defect {defect:e} exceeds tolerance {tolerance:e}")]
    BasisNotOrthonormal { defect: f64, tolerance: f64 },

    /// A file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Ingested data violates a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// An iterative numerical procedure did not converge.
    #[error("numerical failure: {0}")]
    SolverFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl QncError {
    /// Exit code the CLI should use for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            QncError::SolverFailure(_) => 3,
            _ => 2,
        }
    }
}
