use std::path::Path;

use saferoute_core::bn::{BnError, NetworkFormatError};
use saferoute_core::infer::InferError;
use saferoute_core::ingest::IngestError;
use saferoute_core::learn::LearnError;
use saferoute_core::route::RouteError;
use thiserror::Error;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Data = 2,
    Computation = 3,
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            kind: ExitKind::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            kind: ExitKind::Data,
            message: message.into(),
        }
    }

    pub fn computation(message: impl Into<String>) -> Self {
        CliError {
            kind: ExitKind::Computation,
            message: message.into(),
        }
    }

    /// Prefixes the message with the file it concerns.
    pub fn in_file(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<BnError> for CliError {
    fn from(e: BnError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<NetworkFormatError> for CliError {
    fn from(e: NetworkFormatError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::InvalidFraction(_) => CliError::usage(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::InvalidConfig(_) | LearnError::InvalidPrior(_) => {
                CliError::usage(e.to_string())
            }
            LearnError::Bn(_) => CliError::data(e.to_string()),
        }
    }
}

impl From<InferError> for CliError {
    fn from(e: InferError) -> Self {
        match e {
            InferError::ZeroEvidenceLikelihood | InferError::StateSpaceTooLarge { .. } => {
                CliError::computation(e.to_string())
            }
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<RouteError> for CliError {
    fn from(e: RouteError) -> Self {
        match &e {
            RouteError::Unreachable { .. } => CliError::computation(e.to_string()),
            RouteError::Inference { source, .. } => {
                let kind = CliError::from(source.clone()).kind;
                CliError {
                    kind,
                    message: e.to_string(),
                }
            }
            _ => CliError::data(e.to_string()),
        }
    }
}
