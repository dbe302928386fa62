use thiserror::Error;

pub type Result<T, E = OracleError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("truncation deficit {deficit:.3e} exceeds budget {budget:.1e} at cutoff {cutoff}; increase the cutoff")]
    IncreaseCutoff { deficit: f64, budget: f64, cutoff: usize },

    #[error("right logarithmic derivative undefined in the truncated space (residual {residual:.3e})")]
    RldUndefined { residual: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("outside oracle scope: {0}")]
    OutOfScope(String),

    #[error(transparent)]
    Engine(#[from] gqcrb_core::Error),
}

impl OracleError {
    pub fn kind(&self) -> &'static str {
        match self {
            OracleError::IncreaseCutoff { .. } => "increase-cutoff",
            OracleError::RldUndefined { .. } => "rld-oracle-undefined",
            OracleError::NumericalFailure(_) => "numerical-failure",
            OracleError::Dimension(_) => "dimension-mismatch",
            OracleError::Domain(_) => "domain-error",
            OracleError::OutOfScope(_) => "out-of-scope",
            OracleError::Engine(e) => e.kind(),
        }
    }
}
