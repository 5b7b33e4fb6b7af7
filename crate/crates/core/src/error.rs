use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("too few records: {0} (need at least 3)")]
    TooFewRecords(usize),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("embedding dimension mismatch on line {line}: expected {expected}, found {found}")]
    EmbeddingDim { line: usize, expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("backward called before any forward pass")]
    NoForwardPass,

    #[error("no user texts")]
    NoUserTexts,

    #[error("setup {setup} requires the {modality} modality")]
    MissingModality {
        setup: &'static str,
        modality: &'static str,
    },

    #[error("unknown setup {0:?}; valid setups: News, TL, DE, TL+DE, N+TL, N+DE, N+TL+DE")]
    UnknownSetup(String),

    #[error("empty split")]
    EmptySplit,

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("zero rank variance")]
    ZeroRankVariance,

    #[error("need at least {needed} items, got {got}")]
    TooFew { needed: usize, got: usize },

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("unknown node {0:?}")]
    UnknownNode(String),

    #[error("graph too sparse: no distance has enough pairs")]
    GraphTooSparse,

    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MISSING_ARTIFACT: i32 = 3;

impl Error {
    /// Process exit code: 3 for a missing upstream artifact, 1 when training
    /// diverged, 2 for every usage or input problem.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingArtifact(_) => EXIT_MISSING_ARTIFACT,
            Error::Diverged { .. } => EXIT_FAILURE,
            _ => EXIT_INPUT,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
