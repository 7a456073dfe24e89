use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("sequence did not terminate: {0}")]
    Divergence(String),
    #[error("bad data: {0}")]
    Data(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("bad fit range: {0}")]
    Range(String),
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
