//! Error type shared across the toolkit.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input data, reported with the 1-based line number in the document.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Header or attribute-level problem (duplicate names, unknown class column, ...).
    #[error("schema error: {0}")]
    Schema(String),

    /// Data violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A model or filter could not be fitted.
    #[error("fit error: {0}")]
    Fit(String),

    /// An error produced while scoring or aggregating predictions.
    #[error("evaluation error: {0}")]
    Eval(String),

    /// A pipeline stage failed; wraps the underlying error with the stage name.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Tag an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code: 1 validation, 2 I/O, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Schema(_)
            | Error::Validation(_)
            | Error::Fit(_)
            | Error::Eval(_) => 1,
            Error::Io(_) => 2,
            Error::Csv(e) => {
                if e.is_io_error() {
                    2
                } else {
                    1
                }
            }
            Error::Json(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}
