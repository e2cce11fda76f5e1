use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("singular expansion: {0}")]
    SingularExpansion(String),
    #[error("variable sets differ")]
    VariableMismatch,
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("truncation order too small: {0}")]
    InsufficientOrder(String),
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
