use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}:{line}: {message}")]
    Ingestion { path: String, line: usize, message: String },

    #[error("calendar error: {0}")]
    Calendar(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("zero variance in {0}")]
    ZeroVariance(String),

    #[error("rank deficient design: collinear columns {}", .0.join(", "))]
    RankDeficient(Vec<String>),

    #[error("clustered standard errors undefined with a single cluster")]
    SingleCluster,

    #[error("provider authentication missing: environment variable {0} is not set")]
    ProviderAuth(String),

    #[error("transient provider failure after {attempts} attempts: {message}")]
    Transient { attempts: usize, message: String },

    #[error("unparseable {kind} response after re-ask: {message}")]
    Response { kind: String, message: String, raw_response: String },

    #[error("io error on {path}: {source}")]
    Io { path: String, source: io::Error },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Short machine-readable tag used by the CLI's error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Integrity(_) => "integrity",
            Error::Parse(_) => "parse",
            Error::Ingestion { .. } => "ingestion",
            Error::Calendar(_) => "calendar",
            Error::UndefinedRatio(_) => "undefined_ratio",
            Error::InsufficientData(_) => "insufficient_data",
            Error::ZeroVariance(_) => "zero_variance",
            Error::RankDeficient(_) => "rank_deficient",
            Error::SingleCluster => "single_cluster",
            Error::ProviderAuth(_) => "provider_auth",
            Error::Transient { .. } => "transient",
            Error::Response { .. } => "response",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
