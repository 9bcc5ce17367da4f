//! Error type shared by every module.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Empty input where at least one observation is required.
    EmptySample,
    /// A non-finite value (NaN or infinity) at the given index.
    NonFinite { index: usize },
    /// Fewer observations than the operation needs.
    TooFewObservations { needed: usize, got: usize },
    /// All residuals vanish (constant sample), so no direction exists.
    DegenerateSample,
    /// Invalid probability assignment (negative mass, bad total, duplicates).
    InvalidPmf(String),
    /// The queried outcome is not in the support.
    OutcomeNotInSupport,
    /// The point lies outside the (truncated) support of the density.
    OutsideSupport,
    /// Level-set root could not be bracketed.
    BracketingFailure(String),
    /// Quadrature did not reach the requested tolerance.
    QuadratureFailure { achieved: f64, requested: f64 },
    /// The fiber distortion degenerates at this point (bracket <= 0).
    SingularFiberPoint,
    /// More than the tolerated fraction of Monte-Carlo draws were singular.
    ExcessSingularDraws { singular: usize, total: usize },
    /// Spread of the draws is zero; no bandwidth can be selected.
    ZeroSpread,
    /// Finite differences produced a non-finite derivative.
    NonFiniteDifference,
    /// Tail ordering is undefined for vector-valued statistics.
    NoCanonicalOrdering,
    /// The interquartile range is zero, so the ancillary is undefined.
    ZeroIqr,
    /// Configuration rejected (bad n_sim, chunk size, bandwidth, ...).
    InvalidConfig(String),
    /// Requested level cannot be resolved on the estimated grid.
    UnresolvableLevel { alpha: f64, lo: f64, hi: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptySample => write!(f, "empty sample"),
            Error::NonFinite { index } => {
                write!(f, "non-finite value at index {index}")
            }
            Error::TooFewObservations { needed, got } => {
                write!(f, "need at least {needed} observations, got {got}")
            }
            Error::DegenerateSample => write!(f, "degenerate sample: all entries equal"),
            Error::InvalidPmf(msg) => write!(f, "invalid probability function: {msg}"),
            Error::OutcomeNotInSupport => write!(f, "outcome not in support"),
            Error::OutsideSupport => write!(f, "point outside density support"),
            Error::BracketingFailure(msg) => write!(f, "failed to bracket level-set root: {msg}"),
            Error::QuadratureFailure { achieved, requested } => write!(
                f,
                "quadrature stalled at relative error {achieved:.3e} (requested {requested:.3e})"
            ),
            Error::SingularFiberPoint => write!(f, "singular fiber point"),
            Error::ExcessSingularDraws { singular, total } => write!(
                f,
                "{singular} of {total} draws hit singular fiber points (> 0.1% tolerated)"
            ),
            Error::ZeroSpread => write!(f, "draws have zero spread"),
            Error::NonFiniteDifference => write!(f, "non-finite finite-difference derivative"),
            Error::NoCanonicalOrdering => {
                write!(f, "tail P-value undefined for vector-valued statistics")
            }
            Error::ZeroIqr => write!(f, "zero interquartile range"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::UnresolvableLevel { alpha, lo, hi } => write!(
                f,
                "level {alpha} outside the resolvable P-value range [{lo:.3e}, {hi:.3e}]"
            ),
        }
    }
}

impl core::error::Error for Error {}
