use std::io;
use std::path::{Path, PathBuf};

use newscap_core::alignment::AlignmentError;
use newscap_core::context::ContextError;
use newscap_core::corpus::CorpusError;
use newscap_core::gateway::GatewayError;
use newscap_core::loss::LossError;
use newscap_core::metrics::MetricsError;
use newscap_core::ner::NerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("missing input: {}", .0.display())]
    MissingInput(PathBuf),
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Protocol(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Other(_) => 1,
            CliError::Usage(_) => 2,
            CliError::MissingInput(_) => 3,
            CliError::Schema(_) => 4,
            CliError::Protocol(_) => 5,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Fails with [`CliError::MissingInput`] unless `path` exists.
pub fn input(path: &Path) -> Result<&Path> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::MissingInput(path.to_path_buf()))
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            CliError::Other(e.to_string())
        } else {
            CliError::Schema(e.to_string())
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io(e) => e.into(),
            e => CliError::Schema(e.to_string()),
        }
    }
}

impl From<NerError> for CliError {
    fn from(e: NerError) -> Self {
        match e {
            NerError::Io(e) => e.into(),
            e => CliError::Schema(e.to_string()),
        }
    }
}

impl From<AlignmentError> for CliError {
    fn from(e: AlignmentError) -> Self {
        match e {
            AlignmentError::Io(e) => e.into(),
            AlignmentError::NegativeCount(_) => CliError::Usage(e.to_string()),
            e => CliError::Schema(e.to_string()),
        }
    }
}

impl From<ContextError> for CliError {
    fn from(e: ContextError) -> Self {
        CliError::Schema(e.to_string())
    }
}

impl From<GatewayError> for CliError {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::BadEndpoint(_) => CliError::Usage(e.to_string()),
            GatewayError::BadTrace { .. } => CliError::Schema(e.to_string()),
            e => CliError::Protocol(e.to_string()),
        }
    }
}

impl From<LossError> for CliError {
    fn from(e: LossError) -> Self {
        match e {
            LossError::Io(e) => e.into(),
            LossError::InvalidWeights(_) => CliError::Usage(e.to_string()),
            e => CliError::Schema(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Ner(e) => e.into(),
            MetricsError::MeteorOutOfRange(_) => CliError::Usage(e.to_string()),
            e => CliError::Schema(e.to_string()),
        }
    }
}
