use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("document is empty or whitespace-only")]
    EmptyDocument,

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus contains no usable transcript/summary pairs")]
    EmptyCorpus,

    #[error("degenerate division: {0}")]
    DivisionDegenerate(&'static str),

    #[error("service unavailable: {0}")]
    ServiceUnavailable(String),

    #[error("malformed service response: {0}")]
    MalformedResponse(String),

    #[error("vocabulary is empty after stop-word filtering")]
    DegenerateVocabulary,

    #[error("too few documents for LDA: {documents} documents, {topics} topics requested")]
    TooFewDocuments { documents: usize, topics: usize },

    #[error("question bank is empty")]
    EmptyBank,

    #[error("no questions supplied for document {0}")]
    NoQuestions(String),

    #[error("no topics detected in document {0}")]
    NoTopicsDetected(String),

    #[error("extractive context is empty")]
    EmptyContext,

    #[error("generation produced no bullets")]
    EmptyGeneration,

    #[error("prompt does not contain the separator {0:?}")]
    MalformedPrompt(String),

    #[error(
        "prediction/reference/source ids do not align \
         (missing predictions: {missing_predictions:?}, missing references: {missing_references:?}, \
         missing sources: {missing_sources:?})"
    )]
    Alignment {
        missing_predictions: Vec<String>,
        missing_references: Vec<String>,
        missing_sources: Vec<String>,
    },

    #[error("missing upstream artifact {0}")]
    MissingArtifact(PathBuf),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Stable machine-readable name of the error variant. Stage wrappers
    /// report the kind of the underlying error.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyDocument => "EmptyDocument",
            Error::Io { .. } => "IoError",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::DivisionDegenerate(_) => "DivisionDegenerate",
            Error::ServiceUnavailable(_) => "ServiceUnavailable",
            Error::MalformedResponse(_) => "MalformedResponse",
            Error::DegenerateVocabulary => "DegenerateVocabulary",
            Error::TooFewDocuments { .. } => "TooFewDocuments",
            Error::EmptyBank => "EmptyBank",
            Error::NoQuestions(_) => "NoQuestions",
            Error::NoTopicsDetected(_) => "NoTopicsDetected",
            Error::EmptyContext => "EmptyContext",
            Error::EmptyGeneration => "EmptyGeneration",
            Error::MalformedPrompt(_) => "MalformedPrompt",
            Error::Alignment { .. } => "AlignmentError",
            Error::MissingArtifact(_) => "MissingArtifact",
            Error::ConfigInvalid(_) => "ConfigInvalid",
            Error::Json { .. } => "JsonError",
            Error::Csv(_) => "CsvError",
            Error::Stage { source, .. } => source.kind(),
        }
    }

    /// Innermost error, unwrapping stage context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            already @ Error::Stage { .. } => already,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }
}
