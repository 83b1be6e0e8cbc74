//! Error taxonomy shared by every module in the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants map one-to-one onto the failure classes of the public operations:
/// bad caller input, unparseable graph files (with a 1-based line number),
/// parameter sets that leave the model's domain, violated preconditions
/// (named inequality included in the message), resource guards, iterative
/// solvers that fail to converge (residual included), generators that exhaust
/// their restart budget, and Monte Carlo runs that exhaust a step budget.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("generation failure: {0}")]
    Generation(String),

    #[error("timeout: {0}")]
    Timeout(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
