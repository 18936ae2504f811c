use thiserror::Error;

use crate::superalg::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parity mismatch: {0}")]
    Parity(String),
    #[error("chart mismatch: {0}")]
    Chart(String),
    #[error("unknown variable: {0}")]
    UnknownVariable(String),
    #[error("singular linear part: {0}")]
    Singular(String),
    #[error("iteration did not stabilize after {0} steps")]
    NoConvergence(usize),
    #[error("order out of range: {0}")]
    Order(String),
    #[error("hamiltonians are not related: {0}")]
    NotRelated(String),
    #[error("master equation fails: {0}")]
    MasterDefect(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
}
