//! Exact P-values for discrete distributions.
//!
//! For a discrete statistic the honest measure of surprise is the total
//! probability of outcomes no more probable than the observed one,
//! `P(p_T(T(x)) <= p_T(T(x_0)))`. There is no volume distortion here:
//! pushforwards just aggregate point masses, so relabeling the support never
//! changes the result.

use crate::error::{Error, Result};
use crate::math::round_sig12;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

/// A probability function on a finite support of distinct labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePmf<L: Ord + Clone> {
    support: Vec<L>,
    probs: Vec<f64>,
}

impl<L: Ord + Clone> FinitePmf<L> {
    /// Build a pmf whose mass must total 1 within 1e-12.
    pub fn new(pairs: Vec<(L, f64)>) -> Result<Self> {
        Self::with_mass_tolerance(pairs, 1e-12)
    }

    /// Build a pmf from a truncated countable support; total mass must be
    /// within 1e-9 of 1.
    pub fn new_truncated(pairs: Vec<(L, f64)>) -> Result<Self> {
        Self::with_mass_tolerance(pairs, 1e-9)
    }

    fn with_mass_tolerance(pairs: Vec<(L, f64)>, tol: f64) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidPmf(format!("empty support")));
        }
        let mut seen: BTreeMap<&L, ()> = BTreeMap::new();
        let mut total = 0.0;
        for (label, p) in &pairs {
            if seen.insert(label, ()).is_some() {
                return Err(Error::InvalidPmf(format!("duplicate outcome label")));
            }
            if !(*p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidPmf(format!("negative or non-finite mass")));
            }
            total += p;
        }
        if libm::fabs(total - 1.0) > tol {
            return Err(Error::InvalidPmf(format!(
                "total mass {total} differs from 1 by more than {tol:e}"
            )));
        }
        let (support, probs) = pairs.into_iter().unzip();
        Ok(FinitePmf { support, probs })
    }

    pub fn support(&self) -> &[L] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, label: &L) -> Option<f64> {
        self.support
            .iter()
            .position(|l| l == label)
            .map(|i| self.probs[i])
    }
}

/// Push a pmf forward through a statistic: `p_T(t)` sums the mass of every
/// outcome mapping to `t`. The output support is sorted by label.
pub fn pushforward<L, M, F>(pmf: &FinitePmf<L>, t_map: F) -> FinitePmf<M>
where
    L: Ord + Clone,
    M: Ord + Clone,
    F: Fn(&L) -> M,
{
    let mut acc: BTreeMap<M, f64> = BTreeMap::new();
    for (label, &p) in pmf.support.iter().zip(&pmf.probs) {
        *acc.entry(t_map(label)).or_insert(0.0) += p;
    }
    let (support, probs) = acc.into_iter().unzip();
    FinitePmf { support, probs }
}

/// The exact discrete P-value: total mass of outcomes whose probability is
/// no greater than that of `t0`.
///
/// Probabilities are compared after rounding to 12 significant digits so a
/// relabeling cannot split a tie group, and the qualifying masses are summed
/// in ascending order so the result is a pure function of the probability
/// multiset.
pub fn discrete_pvalue<L: Ord + Clone>(pmf: &FinitePmf<L>, t0: &L) -> Result<f64> {
    let p0 = pmf.prob(t0).ok_or(Error::OutcomeNotInSupport)?;
    let p0r = round_sig12(p0);
    let mut qualifying: Vec<f64> = pmf
        .probs
        .iter()
        .copied()
        .filter(|&p| round_sig12(p) <= p0r)
        .collect();
    if qualifying.len() == pmf.probs.len() {
        // The event is the whole space; do not let stored-mass roundoff
        // leak into the modal P-value.
        return Ok(1.0);
    }
    qualifying.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    for p in qualifying {
        sum += p;
    }
    Ok(libm::fmin(sum, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::vec;

    fn pmf3() -> FinitePmf<i64> {
        FinitePmf::new(vec![(0, 0.25), (1, 0.5), (2, 0.25)]).unwrap()
    }

    #[test]
    fn pushforward_merges_by_addition() {
        let pmf = FinitePmf::new(vec![
            (String::from("a"), 0.25),
            (String::from("b"), 0.5),
            (String::from("c"), 0.25),
        ])
        .unwrap();
        let out = pushforward(&pmf, |l| if l == "b" { 1 } else { 0 });
        assert_eq!(out.support(), &[0, 1]);
        assert_eq!(out.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn pushforward_identity_is_identity() {
        let out = pushforward(&pmf3(), |&l| l);
        assert_eq!(out, pmf3());
    }

    #[test]
    fn pushforward_binomial_parity() {
        // Binomial(4, 1/2): (1,4,6,4,1)/16. Enumeration oracle: even outcomes
        // {0,2,4} carry 1/16 + 6/16 + 1/16 = 1/2, odd {1,3} carry 1/2.
        let pmf = FinitePmf::new(vec![
            (0u8, 1.0 / 16.0),
            (1, 4.0 / 16.0),
            (2, 6.0 / 16.0),
            (3, 4.0 / 16.0),
            (4, 1.0 / 16.0),
        ])
        .unwrap();
        let parity = pushforward(&pmf, |&k| k % 2);
        assert_eq!(parity.support(), &[0, 1]);
        assert!((parity.probs()[0] - 0.5).abs() < 1e-15);
        assert!((parity.probs()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn modal_outcome_gives_one() {
        assert_eq!(discrete_pvalue(&pmf3(), &1).unwrap(), 1.0);
    }

    #[test]
    fn tied_tail_outcomes_sum() {
        // Outcomes 0 and 2 both have mass 0.25 <= 0.25.
        assert_eq!(discrete_pvalue(&pmf3(), &0).unwrap(), 0.5);
    }

    #[test]
    fn missing_outcome_rejected() {
        assert_eq!(
            discrete_pvalue(&pmf3(), &7).unwrap_err(),
            Error::OutcomeNotInSupport
        );
    }

    #[test]
    fn unique_minimum_returns_own_mass() {
        let pmf = FinitePmf::new(vec![(0, 0.7), (1, 0.2), (2, 0.1)]).unwrap();
        assert_eq!(discrete_pvalue(&pmf, &2).unwrap(), 0.1);
    }

    #[test]
    fn invalid_pmfs_rejected() {
        assert!(FinitePmf::new(vec![(0, 0.5), (0, 0.5)]).is_err());
        assert!(FinitePmf::new(vec![(0, 0.5), (1, 0.6)]).is_err());
        assert!(FinitePmf::new(vec![(0, -0.1), (1, 1.1)]).is_err());
        assert!(FinitePmf::<i64>::new(vec![]).is_err());
        // 1e-10 total deficit: fine truncated, not fine strict.
        let pairs = vec![(0, 0.5), (1, 0.5 - 1e-10)];
        assert!(FinitePmf::new(pairs.clone()).is_err());
        assert!(FinitePmf::new_truncated(pairs).is_ok());
    }
}
