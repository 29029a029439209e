use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point lies outside the domain (rho = {rho:.3e})")]
    OutsideDomain { rho: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate domain: acceptance rate {rate:.3e} after {drawn} draws")]
    DegenerateDomain { rate: f64, drawn: usize },

    #[error("bisection failed to bracket the boundary: {0}")]
    Bracketing(String),

    #[error("map is singular at the given point: {0}")]
    SingularMap(String),

    #[error("Gram matrix is not positive definite: leading minor {minor} (pivot {pivot:.3e})")]
    NotPositiveDefinite { minor: usize, pivot: f64 },

    #[error("no feasible start: {0}")]
    Infeasible(String),

    #[error("bracket inconsistency: lower {lo} exceeds upper {hi}")]
    BracketInconsistent { lo: f64, hi: f64 },

    #[error("{path}:{line}:{col}: {msg}")]
    Config {
        path: String,
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("parse error at column {col}: {msg}")]
    Expr { col: usize, msg: String },

    #[error("kernel file: {0}")]
    KernelFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
