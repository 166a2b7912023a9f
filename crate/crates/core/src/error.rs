use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration {config:?} is not in the basis")]
    Lookup { config: Vec<i64> },

    #[error("operands live on different bases ({left} vs {right})")]
    BasisMismatch { left: String, right: String },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("current eigenvalues are degenerate (|I| = {0:e})")]
    DegenerateCurrent(f64),

    #[error("projection onto {sign} currents has weight {weight:e}, below floor {floor:e}")]
    InsufficientWeight { sign: &'static str, weight: f64, floor: f64 },

    #[error("target not reachable from source: residual weight {residual:e} after chain exhausted at d = {depth}")]
    Unreachable { residual: f64, depth: usize },

    #[error("internal numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
