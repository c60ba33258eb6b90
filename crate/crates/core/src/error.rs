use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("undefined for empty input: {0}")]
    UndefinedInput(&'static str),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("out-of-vocabulary token: {0:?}")]
    Oov(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("rank-deficient design matrix: column {column:?} is collinear with {with:?}")]
    RankDeficient { column: String, with: Vec<String> },

    #[error("missing annotation layer: {0}")]
    MissingLayer(&'static str),

    #[error("period {index}: {source}")]
    Period {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
