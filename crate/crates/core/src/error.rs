//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition or parameter constraint was violated before any work
    /// started. Maps to process exit code 2 in the CLI.
    #[error("validation error: {0}")]
    Validation(String),

    /// The nodal system could not be solved (degenerate parameter set).
    #[error("solver error: {0}")]
    Solver(String),

    /// Training loss became non-finite.
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    /// A weight archive could not be read or does not match the target
    /// network.
    #[error("archive error: {0}")]
    Archive(String),

    /// Layer shapes do not chain, or an input has the wrong dimensions.
    #[error("shape error: {0}")]
    Shape(String),

    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }

    pub fn archive(msg: impl Into<String>) -> Self {
        Error::Archive(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn parse(path: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            detail: detail.into(),
        }
    }

    pub fn stage(stage: impl Into<String>, source: Error) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(source),
        }
    }

    /// True for errors that reject inputs before any computation, as opposed
    /// to failures of the computation itself.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Validation(_) => true,
            Error::Stage { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
