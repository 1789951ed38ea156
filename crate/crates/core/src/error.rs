use std::path::PathBuf;

use thiserror::Error;

use crate::extraction::RhoSummary;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Each variant maps to exactly one process exit code via [`Error::exit_code`],
/// which the command-line driver uses verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid feature mask: {0}")]
    InvalidMask(String),

    #[error("invalid assignment probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("selection indicator is constant (all {value}); the probit stage is undefined")]
    DegenerateSelection { value: u8 },

    #[error("probit did not converge after {iterations} iterations (gradient max-norm {gradient_norm:e})")]
    NonConvergence { iterations: usize, gradient_norm: f64 },

    #[error("least-squares design is singular (condition number {condition_number:e})")]
    SingularDesign { condition_number: f64 },

    #[error("insufficient samples: m = {m} observed outcomes for {j} prediction features")]
    InsufficientSamples { m: usize, j: usize },

    #[error("every feature was left unassigned; cannot fit a model with zero prediction features")]
    AllZeroMask,

    #[error("no candidate assignment produced an estimated rho in range: {summary}")]
    NoCandidateInRange { summary: RhoSummary },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("non-finite value in column `{column}` at line {line}")]
    NonFinite { column: String, line: usize },

    #[error("feature `{0}` has zero variance")]
    ZeroVariance(String),

    #[error("bias rule `{0}` selects no rows")]
    EmptySelection(String),

    #[error("degenerate split: train has {train} rows, test has {test}")]
    DegenerateSplit { train: usize, test: usize },

    #[error("all paired differences are identical ({mean_diff}); t statistic undefined")]
    ZeroVarianceDifferences { mean_diff: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error. Codes 1 and 2 are reserved for
    /// unexpected failures and command-line usage errors respectively.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 3,
            Error::Io { .. } => 4,
            Error::Serialization(_) => 5,
            Error::Parse { .. } => 10,
            Error::Schema(_) => 11,
            Error::NonFinite { .. } => 12,
            Error::InvalidDataset(_) => 13,
            Error::ZeroVariance(_) => 14,
            Error::EmptySelection(_) => 15,
            Error::DegenerateSplit { .. } => 16,
            Error::InvalidMask(_) => 20,
            Error::InvalidProbabilities(_) => 21,
            Error::AllZeroMask => 22,
            Error::DegenerateSelection { .. } => 30,
            Error::NonConvergence { .. } => 31,
            Error::SingularDesign { .. } => 32,
            Error::InsufficientSamples { .. } => 33,
            Error::NoCandidateInRange { .. } => 40,
            Error::ZeroVarianceDifferences { .. } => 41,
        }
    }
}
