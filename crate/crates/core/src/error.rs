use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate retraction: smallest singular value {smallest:e} below rank tolerance {tolerance:e}")]
    DegenerateRetraction { smallest: f64, tolerance: f64 },

    #[error("subspaces are (numerically) orthogonal: smallest singular value of X^T Y is {smallest:e}")]
    OrthogonalSubspace { smallest: f64 },

    #[error("invalid tangent vector: {0}")]
    InvalidTangent(String),

    #[error("matrix logarithm outside principal branch: {0}")]
    LogBranch(String),

    #[error("rank-deficient block: smallest singular value {smallest:e}")]
    DegenerateBlock { smallest: f64 },

    #[error("manifold constraint violated: {0}")]
    Infeasible(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("ill-conditioned covariance: {0}")]
    Conditioning(String),

    #[error("degenerate oracle: exact total canonical correlation is zero")]
    DegenerateOracle,

    #[error("stale gradient: tangent based at a different point than the current state")]
    StaleGradient,

    #[error("invalid synthetic spec: {0}")]
    Spec(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },

    #[error("row count mismatch: x has {x_rows} rows, y has {y_rows}")]
    RowCountMismatch { x_rows: usize, y_rows: usize },

    #[error("bad binary format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
