use thiserror::Error;

/// Errors produced by the library. The CLI maps every variant except
/// [`Error::Io`] to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation error at node '{node_id}': {rule}")]
    Validation { node_id: String, rule: String },

    #[error("context '{context_id}': {source}")]
    Context {
        context_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn in_context(self, context_id: &str) -> Self {
        Error::Context {
            context_id: context_id.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
