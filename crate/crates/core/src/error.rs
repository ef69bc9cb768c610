use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("trajectory has no steps")]
    EmptyTrajectory,

    #[error("invalid trajectory {id}: {message}")]
    InvalidTrajectory { id: String, message: String },

    #[error("duplicate trajectory id {id:?} in {first} and {second}")]
    DuplicateTrajectory {
        id: String,
        first: String,
        second: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    ParseFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid plan spec: {0}")]
    InvalidPlan(String),

    #[error("unknown plan setting {0:?}")]
    UnknownSetting(String),

    #[error("metric not applicable: plan {0:?} has an empty phase alphabet")]
    NotApplicable(String),

    #[error("invalid classifier config: {0}")]
    Config(String),

    #[error("base prompt does not contain the plan marker {0:?}")]
    MissingMarker(String),

    #[error("plan marker {0:?} occurs more than once")]
    DuplicateMarker(String),

    #[error("empty sample")]
    EmptySample,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("instance sets differ: {0}")]
    InstanceMismatch(String),

    #[error("empty letter sequence")]
    EmptyLetters,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
