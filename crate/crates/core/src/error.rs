use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operands live in different spaces (prize sets, stream shapes, horizons).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("argument error: {0}")]
    Argument(String),

    /// A model or transform parameter violates its admissible range.
    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("period {period} is inessential: {detail}")]
    Inessential { period: usize, detail: String },

    #[error("query budget exhausted after {queries} queries")]
    BudgetExhausted { queries: u64 },

    #[error("oracle inconsistency: {0}")]
    OracleInconsistency(String),

    /// The anchor lottery is not strictly between two outcomes in preference.
    #[error("anchor is not interior: {0}")]
    AnchorNotInterior(String),

    #[error("invalid generator spec: {0}")]
    Spec(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }
}
