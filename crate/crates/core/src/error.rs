use thiserror::Error;

use crate::geometry::Point;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no usable frame: {0}")]
    Frame(String),
    #[error("interface not covered at {} sample(s), first {:?}", .uncovered.len(), .uncovered.first())]
    Coverage { uncovered: Vec<Point> },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("run aborted: {0}")]
    Abort(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Abort(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
