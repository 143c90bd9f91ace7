use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no header: input is empty")]
    NoHeader,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing vehicle capacity")]
    MissingCapacity,

    #[error("requested {requested} requests but only {available} are available")]
    TooManyRequests { requested: usize, available: usize },

    #[error("invalid instance field `{field}`: {message}")]
    InvalidField { field: String, message: String },

    #[error("unknown location id {0}")]
    UnknownLocation(usize),

    #[error("request {id} demand {demand} exceeds capacity {capacity}")]
    InfeasibleDemand { id: usize, demand: f64, capacity: f64 },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("exhaustive search refuses {requested} requests (limit {limit})")]
    TooLargeForExhaustive { requested: usize, limit: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::InvalidField {
        field: field.to_string(),
        message: message.into(),
    }
}
