use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("element {element} is out of range for a ground set of size {n}")]
    ElementOutOfRange { element: usize, n: usize },

    #[error("element {0} is already in the set")]
    ElementPresent(usize),

    #[error("normalized distance {0} exceeds 1; the normalization constant is too small")]
    Normalization(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("set is not independent in the matroid")]
    NotIndependent,

    #[error("no exchange element found for {0}; the independence oracle violates the matroid axioms")]
    NoExchange(usize),

    #[error("bases have different sizes ({0} vs {1})")]
    SizeMismatch(usize, usize),

    #[error("convex combination is not normalized (total weight {0})")]
    NotNormalized(f64),

    #[error("candidate list is empty")]
    EmptyCandidates,

    #[error("instance too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
