use thiserror::Error;

use crate::verify::ViolationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (dimension mismatch,
    /// negative inflation, answering a finished session, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// An oracle answer was non-finite, had the wrong dimension, or left the
    /// range box the problem declares.
    #[error("oracle contract violation: {0}")]
    OracleContractViolation(String),

    /// A runtime assertion derived from the correctness argument failed. On a
    /// certified instance this never happens; it means the oracle is not
    /// nonexpansive / contracting as claimed.
    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error(
        "truncation case analysis exhausted: final candidate residual {residual} exceeds {eps}"
    )]
    CaseAnalysisExhausted { residual: f64, eps: f64 },

    #[error("precision floor: {0}")]
    PrecisionFloor(String),

    #[error("scale guard: {0}")]
    ScaleGuard(String),

    #[error("incompatible parameters: {0}")]
    Incompatible(String),

    #[error("{0}")]
    Violation(Box<ViolationReport>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }

    pub(crate) fn oracle(msg: impl Into<String>) -> Self {
        Error::OracleContractViolation(msg.into())
    }

    pub(crate) fn breach(msg: impl Into<String>) -> Self {
        Error::InvariantBreach(msg.into())
    }

    /// True for failures that indicate a broken oracle rather than bad input.
    pub fn is_invariant_failure(&self) -> bool {
        matches!(
            self,
            Error::InvariantBreach(_) | Error::CaseAnalysisExhausted { .. } | Error::Violation(_)
        )
    }
}

impl From<ViolationReport> for Error {
    fn from(report: ViolationReport) -> Self {
        Error::Violation(Box::new(report))
    }
}
