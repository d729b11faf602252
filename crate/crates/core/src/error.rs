use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}, column {column}: cannot parse {value:?} as a number")]
    BadNumber {
        line: usize,
        column: usize,
        value: String,
    },

    #[error("line {line}, column {column}: non-finite value")]
    NonFinite { line: usize, column: usize },

    #[error("dataset has no data rows")]
    EmptyDataset,

    #[error("dataset needs at least one feature column and a target column")]
    NoFeatures,

    #[error("split of {rows} rows with train fraction {fraction} leaves one side empty")]
    Split { rows: usize, fraction: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown method {0:?}")]
    UnknownMethod(String),

    #[error("malformed input at {path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownMethod(_) => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
