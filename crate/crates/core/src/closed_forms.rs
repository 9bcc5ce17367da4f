//! Exact reference P-values for cases with known level sets.
//!
//! When the fiber distortion is constant on each fiber, the corrected
//! density is an explicit reweighting of the statistic's own density and the
//! invariant P-value reduces to a level-set probability of a known
//! comparison function. The chi-square family is the workhorse: for
//! `T = x'x` under a standard normal vector the comparison function is
//! `g(t) = t^{(k-1)/2} e^{-t/2}`, whereas a directly measured chi-square
//! variable uses the density itself, `t^{(k/2)-1} e^{-t/2}`. The two differ
//! for k >= 2 — the same number admits two honest P-values depending on how
//! it was observed.

use crate::error::{Error, Result};
use crate::math;
use alloc::format;

/// A positive unimodal comparison function `g` on an interval `(lo, inf)`,
/// carried in log form, together with the CDF of the statistic.
///
/// Construction probes a grid on both sides of the mode and rejects
/// non-unimodal input.
pub struct UnimodalLevelSet<G, C>
where
    G: Fn(f64) -> f64,
    C: Fn(f64) -> f64,
{
    log_g: G,
    mode: f64,
    cdf: C,
    lo: f64,
}

impl<G, C> UnimodalLevelSet<G, C>
where
    G: Fn(f64) -> f64,
    C: Fn(f64) -> f64,
{
    pub fn new(log_g: G, mode: f64, cdf: C, lo: f64) -> Result<Self> {
        // Probe monotonicity: strictly increasing up to the mode, strictly
        // decreasing after it.
        let m = 32;
        let left_span = mode - lo;
        for i in 1..m {
            let a = lo + left_span * (i as f64) / m as f64;
            let b = lo + left_span * (i as f64 + 1.0) / m as f64;
            if !((log_g)(a) < (log_g)(b)) {
                return Err(Error::BracketingFailure(format!(
                    "comparison function not increasing left of the mode"
                )));
            }
        }
        let right_span = 3.0 * (mode - lo) + 40.0;
        for i in 0..m {
            let a = mode + right_span * (i as f64) / m as f64;
            let b = mode + right_span * (i as f64 + 1.0) / m as f64;
            if !((log_g)(a) > (log_g)(b)) {
                return Err(Error::BracketingFailure(format!(
                    "comparison function not decreasing right of the mode"
                )));
            }
        }
        Ok(UnimodalLevelSet {
            log_g,
            mode,
            cdf,
            lo,
        })
    }

    /// `P(g(T) <= g(t0))`: locate the two solutions of `g(t) = g(t0)`
    /// flanking the mode (one of them is `t0` itself) and add the two tail
    /// probabilities.
    pub fn pvalue(&self, t0: f64) -> Result<f64> {
        let target = (self.log_g)(t0);
        if t0 == self.mode || target >= (self.log_g)(self.mode) {
            return Ok(1.0);
        }
        let (a, b) = if t0 < self.mode {
            (t0, self.root_right(target)?)
        } else {
            (self.root_left(target)?, t0)
        };
        Ok(libm::fmin((self.cdf)(a) + 1.0 - (self.cdf)(b), 1.0))
    }

    /// Root of `log g = target` right of the mode: geometric expansion then
    /// bisection to absolute tolerance 1e-12.
    fn root_right(&self, target: f64) -> Result<f64> {
        let mut step = libm::fmax(self.mode - self.lo, 1.0);
        let mut hi = self.mode + step;
        for _ in 0..200 {
            if (self.log_g)(hi) < target {
                break;
            }
            step *= 2.0;
            hi = self.mode + step;
        }
        if (self.log_g)(hi) >= target {
            return Err(Error::BracketingFailure(format!(
                "no right root below level {target:e}"
            )));
        }
        let mut lo = self.mode;
        bisect(|t| (self.log_g)(t), target, &mut lo, &mut hi);
        Ok(0.5 * (lo + hi))
    }

    /// Root of `log g = target` left of the mode, approaching the open edge
    /// by halving.
    fn root_left(&self, target: f64) -> Result<f64> {
        let mut lo = self.lo + (self.mode - self.lo) * 0.5;
        let mut hi = self.mode;
        for _ in 0..2100 {
            if (self.log_g)(lo) < target {
                break;
            }
            hi = lo;
            lo = self.lo + (lo - self.lo) * 0.5;
        }
        if (self.log_g)(lo) >= target {
            return Err(Error::BracketingFailure(format!(
                "no left root below level {target:e}"
            )));
        }
        // Here g increases on [lo, hi]: bisect with flipped orientation.
        let mut a = hi;
        let mut b = lo;
        bisect(|t| (self.log_g)(t), target, &mut a, &mut b);
        Ok(0.5 * (a + b))
    }
}

/// Bisection for `f(t) = target` where `f(*keep) >= target > f(*drop)`.
fn bisect<F: Fn(f64) -> f64>(f: F, target: f64, keep: &mut f64, drop: &mut f64) {
    for _ in 0..200 {
        let mid = 0.5 * (*keep + *drop);
        if mid == *keep || mid == *drop {
            break;
        }
        if f(mid) >= target {
            *keep = mid;
        } else {
            *drop = mid;
        }
        if libm::fabs(*keep - *drop) <= 1e-12 {
            break;
        }
    }
}

/// Two-sided P-value for the sample mean of `n` standard normal
/// observations: `2 (1 - Phi(sqrt(n) |xbar0|))`.
///
/// The mean is an affine statistic, so its distortion is constant and the
/// invariant P-value is the usual two-sided normal one; `n` enters through
/// the sampling variance `1/n` of the mean.
pub fn mean_stat_pvalue(xbar0: f64, n: u32) -> f64 {
    assert!(n >= 1);
    2.0 * math::normal_sf(libm::sqrt(n as f64) * libm::fabs(xbar0))
}

/// Invariant P-value for `T = x'x`, `x ~ N_k(0, I)`:
/// `P(g(T) <= g(t0))` with `g(t) = t^{(k-1)/2} e^{-t/2}`.
///
/// For `k = 1` the comparison function is decreasing and this reduces to
/// the chi-square survival function; for `k >= 2` it is two-sided with mode
/// `k - 1`.
pub fn chisq_invariant_pvalue(k: u32, t0: f64) -> Result<f64> {
    assert!(k >= 1);
    if !(t0 > 0.0) {
        return Err(Error::OutsideSupport);
    }
    if k == 1 {
        return Ok(math::chisq_sf(1, t0));
    }
    let e = (k as f64 - 1.0) / 2.0;
    let ls = UnimodalLevelSet::new(
        move |t: f64| e * libm::log(t) - t / 2.0,
        k as f64 - 1.0,
        move |t: f64| math::chisq_cdf(k, t),
        0.0,
    )?;
    ls.pvalue(t0)
}

/// P-value for a directly measured chi-square variable discretized in equal
/// intervals: `P(g(T) <= g(t0))` with `g(t) = t^{(k/2)-1} e^{-t/2}` (the
/// chi-square density shape itself).
///
/// Monotone decreasing for `k <= 2` (pure tail); two-sided with mode `k - 2`
/// for `k >= 3`.
pub fn chisq_measured_pvalue(k: u32, t0: f64) -> Result<f64> {
    assert!(k >= 1);
    if !(t0 > 0.0) {
        return Err(Error::OutsideSupport);
    }
    if k <= 2 {
        return Ok(math::chisq_sf(k, t0));
    }
    let e = k as f64 / 2.0 - 1.0;
    let ls = UnimodalLevelSet::new(
        move |t: f64| e * libm::log(t) - t / 2.0,
        k as f64 - 2.0,
        move |t: f64| math::chisq_cdf(k, t),
        0.0,
    )?;
    ls.pvalue(t0)
}

/// Asymptotic Jarque-Bera P-value: chi-square(2) tail, `exp(-t/2)`.
pub fn jb_asymptotic_pvalue(t: f64) -> f64 {
    assert!(t >= 0.0);
    libm::exp(-t / 2.0)
}
