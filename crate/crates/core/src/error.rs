use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error in {path} at line {line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("corpus degenerate: {0}")]
    DegenerateCorpus(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("zero vector")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("fallback impossible: {0}")]
    FallbackImpossible(String),

    #[error("empty search set: {0}")]
    EmptySearchSet(String),

    #[error("unseen in reference: {0}")]
    Unseen(String),

    #[error("topic unscoreable: {0}")]
    Unscoreable(String),

    #[error("need at least two topics")]
    TooFewTopics,

    #[error("unembeddable: {0}")]
    Unembeddable(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("response parse error: {0}")]
    ResponseParse(String),

    #[error("response schema error: {0}")]
    ResponseSchema(String),

    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),

    #[error("request rejected (HTTP {status}): {excerpt}")]
    RequestRejected { status: u16, excerpt: String },

    #[error("topic {topic_index} failed: {source}")]
    TopicFailed {
        topic_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("all {0} topics failed to refine")]
    AllTopicsFailed(usize),

    #[error("report mismatch: {0}")]
    ReportMismatch(String),

    #[error("classification error: {0}")]
    Classification(String),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Backend,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::DegenerateCorpus(_) => "corpus_degenerate",
            Error::Config(_) => "config",
            Error::Contract(_) => "contract",
            Error::ZeroVector => "zero_vector",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::FallbackImpossible(_) => "fallback_impossible",
            Error::EmptySearchSet(_) => "empty_search_set",
            Error::Unseen(_) => "unseen_in_reference",
            Error::Unscoreable(_) => "topic_unscoreable",
            Error::TooFewTopics => "too_few_topics",
            Error::Unembeddable(_) => "unembeddable",
            Error::Protocol(_) => "protocol",
            Error::ResponseParse(_) => "response_parse",
            Error::ResponseSchema(_) => "response_schema",
            Error::BackendUnavailable(_) => "backend_unavailable",
            Error::RequestRejected { .. } => "request_rejected",
            Error::TopicFailed { source, .. } => source.code(),
            Error::AllTopicsFailed(_) => "all_topics_failed",
            Error::ReportMismatch(_) => "report_mismatch",
            Error::Classification(_) => "classification",
            Error::Json(_) => "json",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) => ErrorClass::Usage,
            Error::BackendUnavailable(_)
            | Error::RequestRejected { .. }
            | Error::AllTopicsFailed(_)
            | Error::Protocol(_)
            | Error::ResponseParse(_)
            | Error::ResponseSchema(_) => ErrorClass::Backend,
            Error::TopicFailed { source, .. } => source.class(),
            _ => ErrorClass::Data,
        }
    }
}
