use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix is not symmetric (max deviation {deviation:.3e})")]
    NonSymmetric { deviation: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("matrix is numerically singular (condition number {condition:.3e})")]
    Singular { condition: f64 },

    #[error("matrix does not have the complex block pattern (max deviation {deviation:.3e})")]
    BlockPattern { deviation: f64 },

    #[error("all generators are zero")]
    ZeroGenerators,

    #[error("closure dimension {dim} exceeds the limit {max_dim}")]
    ClosureBlowup { dim: usize, max_dim: usize },

    #[error("element is not a member of the subspace (residual {residual:.3e})")]
    NotMember { residual: f64 },

    #[error("algebra has no identity element")]
    NotUnital,

    #[error("ambient identity already lies in the algebra")]
    AlreadyUnital,

    #[error("element norm {norm} must be strictly below 1")]
    NormTooLarge { norm: f64 },

    #[error("element is not selfadjoint (deviation {deviation:.3e})")]
    NotSelfadjoint { deviation: f64 },

    #[error("operation requires the full matrix algebra as domain")]
    FullDomainRequired,

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("map is not selfadjoint on the diagonal (residual {residual:.3e})")]
    DiagonalNotSelfadjoint { residual: f64 },

    #[error("canonical extension is not well defined (residual {residual:.3e})")]
    NotWellDefined { residual: f64 },

    #[error(
        "feasible extension not found after {iterations} iterations \
         (residual {residual:.3e}); a feasible point exists, so this is a numerical failure"
    )]
    ExtensionNotFound { iterations: usize, residual: f64 },

    #[error("real positivity violated (min eigenvalue {min_eig:.3e})")]
    RealPositivityViolation { min_eig: f64 },

    #[error("map does not satisfy the precondition: {0}")]
    Precondition(String),

    #[error("inconsistent results: {0}")]
    Inconsistent(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
