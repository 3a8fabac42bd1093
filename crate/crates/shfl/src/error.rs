use std::io;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    /// Malformed JSON in an input file.
    #[error("{}:{line}:{column}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, column: usize, msg: String },

    /// A well-formed config with a value out of range.
    #[error("invalid config at `{field}`: {msg}")]
    Invalid { field: String, msg: String },

    #[error("{}:{line}: {msg}", path.display())]
    Dataset { path: PathBuf, line: usize, msg: String },

    #[error(transparent)]
    Core(#[from] shfl_core::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn invalid(field: impl Into<String>, msg: impl ToString) -> Self {
        Error::Invalid { field: field.into(), msg: msg.to_string() }
    }

    /// 0 is success; 2 is bad input (config, instance or dataset); 3 is an
    /// infeasible instance; 1 is anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Invalid { .. } | Error::Dataset { .. } => 2,
            Error::Core(shfl_core::Error::Infeasible(_) | shfl_core::Error::TooManyEdges { .. }) => 3,
            Error::Core(_) => 2,
            Error::Io { .. } | Error::Csv(_) | Error::Json(_) => 1,
        }
    }
}

/// serde_json's message without its trailing " at line L column C", which
/// [`Error::Parse`] already carries.
pub(crate) fn strip_location(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    match msg.rsplit_once(" at line ") {
        Some((head, _)) => head.to_string(),
        None => msg,
    }
}
