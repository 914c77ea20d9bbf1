use std::path::PathBuf;

use thiserror::Error;

/// A scenario or platform configuration that cannot be built.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid config `{key}`: {reason}")]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

/// An argument outside the domain of a pure model function.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("utilization {0} outside [0, 1]")]
    Utilization(f64),
    #[error("`{name}` has length {got}, expected {expected}")]
    Length {
        name: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("`{name}` must be non-negative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlacementError {
    #[error("cannot place {requested} replicas on {available} eligible hosts")]
    TooManyReplicas { requested: usize, available: usize },
    #[error("replica count must be at least 1")]
    ZeroReplicas,
}

/// Internal invariant violation inside the event loop.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("engine invariant violated: {0}")]
pub struct EngineError(pub String);

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{context}: {source}")]
    Cell {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::Placement(_) => true,
            Error::Cell { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
