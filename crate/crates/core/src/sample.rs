//! Shared domain types: validated samples, Monte-Carlo configuration, and
//! the report record every pipeline ultimately produces.
//!
//! All types are immutable after construction and safe to share across
//! workers.

use crate::error::{Error, Result};
use alloc::string::String;
use alloc::vec::Vec;

/// An ordered sequence of finite real observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    /// Validate and wrap raw observations: every entry must be finite and
    /// the sequence non-empty.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Sample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }
}

/// Validate raw observations into a [`Sample`].
pub fn validate_sample(values: Vec<f64>) -> Result<Sample> {
    Sample::new(values)
}

/// Configuration of a Monte-Carlo run.
///
/// `chunk_size` fixes the substream layout: replicate `j` always comes from
/// chunk `j / chunk_size`, so results are independent of how chunks are
/// assigned to workers.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub n_sim: usize,
    pub seed: u64,
    pub chunk_size: usize,
    /// Optional KDE bandwidth override; `None` selects the reference rule.
    pub bandwidth: Option<f64>,
    /// Density-evaluation grid resolution.
    pub grid_size: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            n_sim: 200_000,
            seed: 0,
            chunk_size: 4096,
            bandwidth: None,
            grid_size: 512,
        }
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sim == 0 {
            return Err(Error::InvalidConfig(String::from("n_sim must be positive")));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidConfig(String::from(
                "chunk_size must be positive",
            )));
        }
        if self.grid_size < 2 {
            return Err(Error::InvalidConfig(String::from("grid_size must be >= 2")));
        }
        if let Some(h) = self.bandwidth {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidConfig(String::from(
                    "bandwidth must be a positive finite real",
                )));
            }
        }
        Ok(())
    }

    /// Reported P-values require at least 1000 replicates; smaller runs are
    /// for tests only.
    pub fn validate_for_report(&self) -> Result<()> {
        self.validate()?;
        if self.n_sim < 1000 {
            return Err(Error::InvalidConfig(String::from(
                "reported P-values require n_sim >= 1000",
            )));
        }
        Ok(())
    }
}

/// A scalar or a pair, for statistics with one or two components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarOrPair {
    Scalar(f64),
    Pair(f64, f64),
}

impl ScalarOrPair {
    pub fn as_scalar(&self) -> Option<f64> {
        match *self {
            ScalarOrPair::Scalar(v) => Some(v),
            ScalarOrPair::Pair(..) => None,
        }
    }
}

/// The full output record of a P-value computation.
///
/// Every present P-value lies in [0, 1]; `mc_standard_error` is the binomial
/// standard error of `p_invariant` and is bounded by `0.5 / sqrt(n_sim)`.
/// Closed-form results carry no Monte-Carlo echo.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueReport {
    pub statistic_name: String,
    pub t_observed: ScalarOrPair,
    pub p_invariant: f64,
    /// Plain density P-value (uncorrected), when estimated.
    pub p_plain: Option<f64>,
    /// Equal-length-discretization P-value for directly measured statistics.
    pub p_measured: Option<f64>,
    /// Right-tail P-value, when a scalar ordering is meaningful.
    pub p_tail: Option<f64>,
    /// Asymptotic reference P-value (chi-square tail for Jarque-Bera).
    pub p_asymptotic: Option<f64>,
    pub mc: Option<McEcho>,
}

/// Echo of the Monte-Carlo configuration that produced a report.
#[derive(Debug, Clone, PartialEq)]
pub struct McEcho {
    pub mc_standard_error: f64,
    pub n_sim: usize,
    pub seed: u64,
    pub chunk_size: usize,
    /// KDE bandwidth actually used, when the pipeline estimates densities.
    pub bandwidth: Option<ScalarOrPair>,
    /// Draws dropped because the fiber distortion degenerated there.
    pub singular_draws: usize,
}

impl PValueReport {
    /// Check the report invariants (P-values in range, standard error bound).
    pub fn check(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        let mut ok = in_unit(self.p_invariant);
        for p in [self.p_plain, self.p_measured, self.p_tail, self.p_asymptotic]
            .into_iter()
            .flatten()
        {
            ok &= in_unit(p);
        }
        if let Some(mc) = &self.mc {
            ok &= mc.mc_standard_error >= 0.0
                && mc.mc_standard_error <= 0.5 / libm::sqrt(mc.n_sim as f64);
        }
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(String::from(
                "report violates its invariants",
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_well_formed_input() {
        let s = Sample::new(alloc::vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.n(), 3);
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_nan_with_index() {
        let err = Sample::new(alloc::vec![1.0, f64::NAN]).unwrap_err();
        assert_eq!(err, Error::NonFinite { index: 1 });
        let err = Sample::new(alloc::vec![1.0, 2.0, f64::INFINITY]).unwrap_err();
        assert_eq!(err, Error::NonFinite { index: 2 });
    }

    #[test]
    fn rejects_empty() {
        assert_eq!(Sample::new(alloc::vec![]).unwrap_err(), Error::EmptySample);
    }

    #[test]
    fn config_validation() {
        let mut c = MonteCarloConfig::default();
        c.validate_for_report().unwrap();
        c.n_sim = 999;
        assert!(c.validate_for_report().is_err());
        assert!(c.validate().is_ok());
        c.bandwidth = Some(-1.0);
        assert!(c.validate().is_err());
    }
}
