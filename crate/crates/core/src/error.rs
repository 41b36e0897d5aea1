use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("truncation mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },

    #[error("degree {degree} lies outside the exact window (exact below degree {precision})")]
    WindowExceeded { degree: usize, precision: usize },

    #[error("not a unit: {0}")]
    NotAUnit(String),

    #[error("invalid differential constant: {0}")]
    InvalidConstant(String),

    #[error("invalid differential tower: {0}")]
    InvalidTower(String),

    #[error("localization contexts differ")]
    ContextMismatch,

    #[error("unsupported localization context: {0}")]
    UnsupportedContext(String),

    #[error("not initialized: {0}")]
    NotInitialized(String),

    #[error("not a species: {0}")]
    NotASpecies(String),

    #[error("sequence is not Cauchy at horizon {horizon}: {reason}")]
    NotCauchy { horizon: usize, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("instance failed certification: {0}")]
    Certification(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("evaluation error: {0}")]
    Eval(String),
}
