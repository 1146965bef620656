use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the field pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Taylor order {0}: supported orders are 0..=4")]
    InvalidOrder(u32),
    #[error("invalid local scale {0}: must be positive and finite")]
    InvalidScale(f64),
    #[error("dimension mismatch: expected {expected} values, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("softmin over an empty neighborhood")]
    EmptyNeighborhood,
    #[error("non-finite or negative distance {0}")]
    InvalidDistance(f64),
    #[error("field contains no expansion points")]
    EmptyField,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh integrity: {0}")]
    MeshIntegrity(String),
    #[error("oracle has no surface crossing inside the normalization cube")]
    NoSurface,
    #[error("singular least-squares system (rank {rank} < {columns})")]
    SingularSystem { rank: usize, columns: usize },
    #[error("fit of expansion point {index} failed: {source}")]
    PointFit {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("no near-surface units: nothing to extract")]
    EmptySurface,
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("malformed {kind} data: {message}")]
    Format { kind: &'static str, message: String },
    #[error("unsupported field file version {0}")]
    UnsupportedVersion(u16),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn format(kind: &'static str, message: impl Into<String>) -> Self {
        Error::Format { kind, message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// The innermost error, looking through per-point annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::PointFit { source, .. } => source.root(),
            other => other,
        }
    }
}
