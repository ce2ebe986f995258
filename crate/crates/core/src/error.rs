use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Variants split into two families: validation problems with the input
/// (bad files, wrong shapes, unusable labels) and numerical failures
/// (loss of definiteness, solvers that do not converge). The CLI maps the
/// former to exit code 1 and the latter to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("diagonal entry {index} is {value}, not within tolerance of 1")]
    DiagonalNotUnit { index: usize, value: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("subspaces are at the cut locus (smallest cosine {min_cosine:e})")]
    CutLocus { min_cosine: f64 },

    #[error("group {group} has {size} member(s); at least {required} required")]
    DegenerateGroup {
        group: &'static str,
        size: usize,
        required: usize,
    },

    #[error("pooled covariance is singular")]
    SingularCovariance,

    #[error("only one class present; {0} is undefined")]
    SingleClass(&'static str),

    #[error("too few samples: {0}")]
    TooFewSamples(String),

    #[error("data leakage: {0}")]
    Leakage(String),

    #[error("metric {metric} does not support {operation}")]
    UnsupportedMetric {
        metric: &'static str,
        operation: &'static str,
    },

    #[error("{path}: parse error at row {row}, column {col}: {message}")]
    Parse {
        path: String,
        row: usize,
        col: usize,
        message: String,
    },

    #[error("duplicate subject id `{0}`")]
    DuplicateId(String),

    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error("subject `{subject}`: {source}")]
    Subject {
        subject: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        if let Error::Subject { source, .. } = self {
            return source.is_numerical();
        }
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::NoConvergence { .. }
                | Error::CutLocus { .. }
                | Error::SingularCovariance
        )
    }

    pub(crate) fn for_subject(subject: &str, source: Error) -> Self {
        Error::Subject {
            subject: subject.to_string(),
            source: Box::new(source),
        }
    }

    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
