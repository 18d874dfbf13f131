use std::io;

use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop contact rejected for node {0}")]
    SelfLoop(NodeId),

    #[error("contact time must be positive")]
    NonPositiveTime,

    #[error("node {0} not found")]
    NodeNotFound(NodeId),

    #[error("no data in input")]
    EmptyInput,

    #[error("{malformed} of {lines} non-empty lines are malformed (wrong file?)")]
    MostlyMalformed { malformed: usize, lines: usize },

    #[error("archive version mismatch: expected {expected:?}, found {found:?}")]
    VersionMismatch { expected: String, found: String },

    #[error("truncated archive: {0}")]
    Truncated(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: String,
        expected: String,
        found: String,
    },

    #[error("empty walk corpus")]
    EmptyCorpus,

    #[error("nothing to report: no analytics were computed")]
    EmptyReport,

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code, used in reports and CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SelfLoop(_) => "E_SELF_LOOP",
            Error::NonPositiveTime => "E_NON_POSITIVE_TIME",
            Error::NodeNotFound(_) => "E_NODE_NOT_FOUND",
            Error::EmptyInput => "E_EMPTY_INPUT",
            Error::MostlyMalformed { .. } => "E_MOSTLY_MALFORMED",
            Error::VersionMismatch { .. } => "E_VERSION_MISMATCH",
            Error::Truncated(_) => "E_TRUNCATED",
            Error::Parse { .. } => "E_PARSE",
            Error::Config(_) => "E_CONFIG",
            Error::Shape { .. } => "E_SHAPE",
            Error::EmptyCorpus => "E_EMPTY_CORPUS",
            Error::EmptyReport => "E_EMPTY_REPORT",
            Error::Io(_) => "E_IO",
            Error::Json(_) => "E_JSON",
        }
    }

    pub(crate) fn shape(context: impl Into<String>, expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape {
            context: context.into(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
