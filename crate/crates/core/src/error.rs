use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("rank {k} out of range for a sample of size {n}")]
    RankOutOfRange { k: usize, n: usize },

    #[error("lag {h} out of range for a sample of size {n}")]
    LagOutOfRange { h: usize, n: usize },

    /// An order statistic entering a Hill logarithm is zero or negative.
    #[error("order statistic {value} at rank {rank} is not positive; the Hill estimator is undefined")]
    NonPositiveOrderStatistic { rank: usize, value: f64 },

    /// The Hill estimate of the marginal tail is exactly zero, so the
    /// scaling exponent ratio cannot be formed.
    #[error("degenerate Hill estimate (k = {k}): the top order statistics are all equal")]
    DegenerateHill { k: usize },

    #[error("degenerate scaling estimate: no exceedance is followed by a nonzero value")]
    DegenerateScaling,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("missing capability: {0}")]
    MissingCapability(String),

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Ingest { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable code, used when failures are recorded in study
    /// output rather than propagated.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } => "non_finite",
            Error::RankOutOfRange { .. } => "rank_out_of_range",
            Error::LagOutOfRange { .. } => "lag_out_of_range",
            Error::NonPositiveOrderStatistic { .. } => "nonpositive_order_statistic",
            Error::DegenerateHill { .. } => "degenerate_hill",
            Error::DegenerateScaling => "degenerate_scaling",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::MissingCapability(_) => "missing_capability",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Ingest { .. } => "ingest",
        }
    }
}
