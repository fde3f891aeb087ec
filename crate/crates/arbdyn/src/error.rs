use thiserror::Error;

/// Errors surfaced by the library. The CLI maps these onto exit codes:
/// argument/precondition failures -> 1, resource budgets -> 2,
/// verification mismatches -> 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    #[error("verification mismatch: {0}")]
    Verify(String),
}

pub type Result<T> = std::result::Result<T, Error>;
