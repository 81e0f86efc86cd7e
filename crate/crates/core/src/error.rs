use thiserror::Error;

/// Everything that can go wrong while materializing or querying a construction.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An enumeration or materialization limit was hit.
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: String,
        limit: String,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Some descendant has two stage decompositions.
    #[error("stages {from}..{to} do not form a direct sum")]
    NotDirectSum { from: usize, to: usize },
    #[error("stage {0} is not staircase-shaped")]
    NotStronglyArithmetic(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn budget(what: &'static str, needed: impl ToString, limit: impl ToString) -> Self {
        Error::BudgetExceeded {
            what,
            needed: needed.to_string(),
            limit: limit.to_string(),
        }
    }
}
