use std::path::PathBuf;

use thiserror::Error;

/// Broad failure category, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Io,
    Internal,
}

#[derive(Error, Debug)]
pub enum Error {
    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("label {label} at point {index} is outside [0, {num_classes})")]
    LabelOutOfRange {
        index: usize,
        label: i32,
        num_classes: usize,
    },

    #[error("point {index} has a non-finite coordinate")]
    NonFiniteCoordinate { index: usize },

    #[error("prediction contains ignore label (point {index})")]
    IgnoreInPrediction { index: usize },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("query radius {radius} exceeds grid cell size {cell_size}")]
    RadiusExceedsCell { radius: f64, cell_size: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("incompatible reports: {0}")]
    IncompatibleReports(String),

    #[error("class groups overlap on class {class} ({first} and {second})")]
    OverlappingGroups {
        class: usize,
        first: String,
        second: String,
    },

    #[error("malformed PLY at byte {offset}: {message}")]
    Ply { offset: u64, message: String },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed weight file at byte {offset}: {message}")]
    Weights { offset: u64, message: String },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. }
            | Error::Json { .. }
            | Error::Ply { .. }
            | Error::Parse { .. }
            | Error::Weights { .. } => ErrorKind::Io,
            Error::Internal(_) => ErrorKind::Internal,
            _ => ErrorKind::Validation,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
