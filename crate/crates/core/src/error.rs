use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid state: {what} violated by {deviation:.3e}")]
    InvalidState { what: &'static str, deviation: f64 },

    #[error("unphysical covariance: uncertainty matrix has eigenvalue {min_eigenvalue:.3e}")]
    Unphysical { min_eigenvalue: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("inconsistent linear system (relative residual {residual:.3e})")]
    InconsistentSystem { residual: f64 },

    #[error("right logarithmic derivative undefined (condition number {condition:.3e})")]
    RldUndefined { condition: f64 },

    #[error("parameters not identifiable; Fisher information is singular along {direction:?}")]
    Unidentifiable { direction: Vec<f64> },

    #[error("channel produced an invalid state: {0}")]
    InternalConsistency(String),

    #[error("measurement sensitivity diverges (|d<M>/dtheta| = {slope:.3e})")]
    DivergingSensitivity { slope: f64 },

    #[error("closed form undefined: {0}")]
    ClosedFormUndefined(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable kebab-case name used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain-error",
            Error::Dimension(_) => "dimension-mismatch",
            Error::InvalidState { .. } => "invalid-state",
            Error::Unphysical { .. } => "unphysical-state",
            Error::NumericalFailure(_) => "numerical-failure",
            Error::InconsistentSystem { .. } => "inconsistent-system",
            Error::RldUndefined { .. } => "rld-undefined",
            Error::Unidentifiable { .. } => "unidentifiable-parameters",
            Error::InternalConsistency(_) => "internal-consistency",
            Error::DivergingSensitivity { .. } => "diverging-sensitivity",
            Error::ClosedFormUndefined(_) => "closed-form-undefined",
            Error::Parse(_) => "parse-error",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
