use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported state: {0}")]
    Unsupported(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("insufficient order: need {needed}, have {have}")]
    InsufficientOrder { needed: usize, have: usize },
    #[error("precision error: {0}")]
    Precision(String),
    #[error("degenerate Pade approximant [{l}/{m}]")]
    DegeneratePade { l: usize, m: usize },
    #[error("integration error: {0}")]
    Integration(String),
    #[error("quadrature not converged: relative change {delta:e} under refinement")]
    Quadrature { delta: f64 },
    #[error("invalid trial parameters: {0}")]
    InvalidParams(String),
    #[error("optimizer failed: {0}")]
    Infeasible(String),
    #[error("no sign change of E(gamma) in [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Parse { .. } | Error::Schema(_) => 3,
            Error::Domain(_) | Error::Unsupported(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
