//! Error types shared across the crate.

use num_bigint::BigUint;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by group construction, the engine, and the statistics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed inputs: mismatched lengths, bad labels, empty samples.
    #[error("structural error: {0}")]
    Structure(String),

    /// Out-of-domain parameters (alpha, counts, replication budgets).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Exact enumeration refused because the group is too large.
    #[error(
        "group has {m} elements, above the enumeration cap of {cap}; \
         use Monte Carlo mode instead"
    )]
    CapExceeded { m: BigUint, cap: usize },

    /// A studentizer's scale estimate vanished.
    #[error("degenerate scale: {0}")]
    DegenerateScale(String),

    /// The statistic is undefined on this input (e.g. an empty streak set).
    #[error("statistic undefined: {0}")]
    UndefinedStatistic(String),

    /// A matrix inversion failed or was too ill-conditioned to trust.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// A recomputed statistic came out NaN; NaN has no rank.
    #[error("non-finite statistic: {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateScale(msg.into())
    }

    pub(crate) fn undefined(msg: impl Into<String>) -> Self {
        Error::UndefinedStatistic(msg.into())
    }
}
