use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("validation failed for id {id}: {message}")]
    Validation { id: i64, message: String },

    #[error("overlapping spans in review (ids {ids:?}): {first} and {second}")]
    Overlap {
        ids: Vec<i64>,
        first: String,
        second: String,
    },

    #[error("span {span} does not align with token boundaries")]
    Alignment { span: String },

    #[error("token count mismatch for review {review}: {detail}")]
    TokenMismatch { review: String, detail: String },

    #[error("invalid prediction: {0}")]
    Prediction(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
