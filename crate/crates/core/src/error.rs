use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index ({i}, {j}) is invalid: both indices must be >= 1")]
    InvalidMode { i: u32, j: u32 },

    #[error("invalid field spec: {0}")]
    InvalidFieldSpec(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("diagonal-linear parameter m{index} = {value} lies outside [0.1, 5]")]
    CoefficientOutOfRange { index: usize, value: f64 },

    #[error("grid too small: {0} points per side, need at least 3")]
    GridTooSmall(usize),

    #[error("grid data has {actual} values, expected {expected}")]
    GridShape { expected: usize, actual: usize },

    #[error("fields have different boundary conditions")]
    BoundaryConditionMismatch,

    #[error("the sine-transform inverse only accepts Dirichlet data")]
    DirichletOnly,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing array file {path}")]
    MissingArrayFile { path: PathBuf },

    #[error("shape mismatch in {path}: manifest implies {expected} bytes, file has {actual}")]
    ShapeMismatch { path: PathBuf, expected: u64, actual: u64 },

    #[error("unknown manifest version {0}")]
    UnknownVersion(u32),

    #[error("malformed manifest {path}: {source}")]
    ManifestParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("inconsistent manifest: {0}")]
    InvalidManifest(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short category tag used by the command line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidMode { .. }
            | Error::InvalidFieldSpec(_)
            | Error::InvalidField(_)
            | Error::CoefficientOutOfRange { .. }
            | Error::GridTooSmall(_)
            | Error::GridShape { .. }
            | Error::BoundaryConditionMismatch
            | Error::DirichletOnly => "invalid-input",
            Error::Io { .. } => "io",
            Error::MissingArrayFile { .. } => "missing-array",
            Error::ShapeMismatch { .. } => "shape-mismatch",
            Error::UnknownVersion(_) => "unknown-version",
            Error::ManifestParse { .. } | Error::InvalidManifest(_) => "manifest",
            Error::ThreadPool(_) => "runtime",
        }
    }
}
