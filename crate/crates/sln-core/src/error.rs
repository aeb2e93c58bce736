use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    /// Parameters fail a precondition (documented on each operation).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// An argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A computation produced an internally inconsistent or unusable result.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The input point set spans no full-dimensional body, so no facet
    /// enumeration exists; callers typically fall back to LP separation.
    #[error("degenerate point set: {0}")]
    Degenerate(String),
    /// Sample-based estimation needs events from both measurement settings.
    #[error("event stream must contain both settings with equal counts")]
    MissingSetting,
}

pub type Result<T> = std::result::Result<T, Error>;
