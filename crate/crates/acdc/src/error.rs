//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error(
        "tolerance too small: {accepted} acceptances in {attempts} attempts \
         (target {target}); smallest scaled distance seen {min_distance:.6e}"
    )]
    ToleranceTooSmall {
        accepted: usize,
        attempts: u64,
        target: usize,
        min_distance: f64,
    },

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("singular design: offending summary columns {columns:?} ({context})")]
    SingularDesign {
        columns: Vec<usize>,
        context: String,
    },

    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    #[error("parameter outside model domain: {0}")]
    DomainViolation(String),

    #[error("non-monotone mapping over the search range: {0}")]
    NonMonotoneMap(String),

    #[error("point estimator failed on subset {index}: {source}")]
    SubsetEstimator {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("mixed region kinds in one batch: {0}")]
    MixedRegionKinds(String),

    #[error("replication failures above threshold: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    ConfigParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
