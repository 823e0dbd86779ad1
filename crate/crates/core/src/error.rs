use thiserror::Error;

use crate::explain::PromptContext;

/// Errors produced anywhere in the simulator, ledger, or explainer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("NDVI value {0} outside [-1, 1]")]
    Domain(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("decision not found: {0}")]
    DecisionNotFound(u64),

    #[error("decision id out of sequence: expected {expected}, got {got}")]
    Sequence { expected: u64, got: u64 },

    #[error("unsupported schema_version {0:?}")]
    SchemaVersion(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("backend error ({kind}): {message}")]
    Backend {
        kind: BackendErrorKind,
        message: String,
        /// The prompt that was being sent, kept so the caller can retry.
        prompt: Option<Box<PromptContext>>,
    },
}

/// Classification of chat-backend failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendErrorKind {
    Config,
    Network,
    Auth,
    RateLimit,
    Timeout,
    Status(u16),
    Response,
}

impl std::fmt::Display for BackendErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BackendErrorKind::Config => f.write_str("config"),
            BackendErrorKind::Network => f.write_str("network"),
            BackendErrorKind::Auth => f.write_str("auth"),
            BackendErrorKind::RateLimit => f.write_str("rate-limit"),
            BackendErrorKind::Timeout => f.write_str("timeout"),
            BackendErrorKind::Status(code) => write!(f, "http {code}"),
            BackendErrorKind::Response => f.write_str("response"),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
