//! Partition-based P-values for a measured continuous response.
//!
//! A continuous model is an idealization of a finite-accuracy measurement:
//! the observable is the partition cell containing the response, and the
//! honest discrete P-value sums the probabilities of all cells no more
//! probable than the observed one. As the cells shrink along nested
//! refinements this converges to `P(f(x) <= f(x_0))`, the level-set
//! probability of the density itself. This module computes both sides and
//! their gap for the built-in density family.

use crate::error::{Error, Result};
use crate::math;
use crate::quad;
use alloc::format;
use alloc::vec::Vec;

/// One-dimensional density with closed-form CDF and known shape.
///
/// Unbounded supports are truncated where the remaining tail mass drops
/// below 1e-12; the truncated tails are treated as qualifying cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density1D {
    Normal { mean: f64, sd: f64 },
    Laplace { loc: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
}

/// Monotone structure of the density, used for level-set computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Constant on the support (uniform): every level set is everything.
    Constant,
    /// Strictly decreasing from the left support edge (exponential).
    Decreasing,
    /// Increasing then decreasing around a single mode.
    Unimodal { mode: f64 },
}

impl Density1D {
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Density1D::Normal { mean, sd } => math::normal_pdf((x - mean) / sd) / sd,
            Density1D::Laplace { loc, scale } => {
                libm::exp(-libm::fabs(x - loc) / scale) / (2.0 * scale)
            }
            Density1D::Uniform { lo, hi } => {
                if x >= lo && x <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Density1D::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * libm::exp(-rate * x)
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Density1D::Normal { mean, sd } => math::normal_cdf((x - mean) / sd),
            Density1D::Laplace { loc, scale } => {
                let z = (x - loc) / scale;
                if z < 0.0 {
                    0.5 * libm::exp(z)
                } else {
                    1.0 - 0.5 * libm::exp(-z)
                }
            }
            Density1D::Uniform { lo, hi } => {
                if x <= lo {
                    0.0
                } else if x >= hi {
                    1.0
                } else {
                    (x - lo) / (hi - lo)
                }
            }
            Density1D::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -libm::expm1(-rate * x)
                }
            }
        }
    }

    /// Support truncated so the excluded tail mass is below 1e-12.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            // Phi(-7.5) ~ 3.2e-14 per side.
            Density1D::Normal { mean, sd } => (mean - 7.5 * sd, mean + 7.5 * sd),
            // exp(-28)/2 ~ 3.5e-13 per side.
            Density1D::Laplace { loc, scale } => (loc - 28.0 * scale, loc + 28.0 * scale),
            Density1D::Uniform { lo, hi } => (lo, hi),
            // exp(-28) ~ 6.9e-13.
            Density1D::Exponential { rate } => (0.0, 28.0 / rate),
        }
    }

    pub fn shape(&self) -> Shape {
        match *self {
            Density1D::Normal { mean, .. } => Shape::Unimodal { mode: mean },
            Density1D::Laplace { loc, .. } => Shape::Unimodal { mode: loc },
            Density1D::Uniform { .. } => Shape::Constant,
            Density1D::Exponential { .. } => Shape::Decreasing,
        }
    }

    fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.support();
        x >= lo && x <= hi
    }
}

/// An equal-width partition of the line into cells `((i-1)w + a, iw + a]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partition1D {
    pub width: f64,
    pub anchor: f64,
}

impl Partition1D {
    pub fn new(width: f64, anchor: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() || !anchor.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "partition width must be positive and finite"
            )));
        }
        Ok(Partition1D { width, anchor })
    }

    /// Index of the cell containing `x` (cells are left-open).
    pub fn cell_index(&self, x: f64) -> i64 {
        libm::ceil((x - self.anchor) / self.width) as i64
    }

    /// Bounds `(lo, hi]` of cell `i`.
    pub fn cell_bounds(&self, i: i64) -> (f64, f64) {
        (
            (i as f64 - 1.0) * self.width + self.anchor,
            i as f64 * self.width + self.anchor,
        )
    }
}

/// Probability of the partition cell containing `x`, via the CDF.
pub fn cell_probability(f: &Density1D, partition: &Partition1D, x: f64) -> Result<f64> {
    if !f.contains(x) {
        return Err(Error::OutsideSupport);
    }
    let (lo, hi) = partition.cell_bounds(partition.cell_index(x));
    Ok(f.cdf(hi) - f.cdf(lo))
}

/// Probability of the cell `(lo, hi]` by adaptive quadrature on the pdf, for
/// densities without a usable CDF. Relative tolerance 1e-10.
pub fn cell_probability_quadrature<F: Fn(f64) -> f64>(pdf: F, lo: f64, hi: f64) -> Result<f64> {
    quad::integrate(pdf, lo, hi, 1e-10)
}

/// The exact partition P-value: total probability of all cells whose
/// probability does not exceed that of the cell containing `x0`.
///
/// Cells are enumerated over the truncated support; the truncated tail mass
/// (below 1e-12) is added as qualifying, since at any usable width it lies
/// below any interior cell probability.
pub fn partition_pvalue(f: &Density1D, partition: &Partition1D, x0: f64) -> Result<f64> {
    let p0 = cell_probability(f, partition, x0)?;
    let (lo, hi) = f.support();
    let i_lo = partition.cell_index(lo);
    let i_hi = partition.cell_index(hi);
    let mut sum = 0.0;
    let mut prev_cdf = f.cdf(partition.cell_bounds(i_lo).0);
    let left_tail = prev_cdf;
    for i in i_lo..=i_hi {
        let hi_edge = partition.cell_bounds(i).1;
        let next_cdf = f.cdf(hi_edge);
        let mass = next_cdf - prev_cdf;
        if mass <= p0 {
            sum += mass;
        }
        prev_cdf = next_cdf;
    }
    let right_tail = 1.0 - prev_cdf;
    sum += left_tail + right_tail;
    Ok(libm::fmin(libm::fmax(sum, 0.0), 1.0))
}

/// The continuous density P-value `P(f(x) <= f(x0))`, computed from the
/// level set of the pdf at `f(x0)`.
///
/// For a unimodal density the level set is two tails delimited by the
/// solutions of `pdf(x) = pdf(x0)` on each monotone piece; the root on the
/// far side of the mode is found by geometric bracket expansion and
/// bisection.
pub fn continuous_density_pvalue(f: &Density1D, x0: f64) -> Result<f64> {
    if !f.contains(x0) {
        return Err(Error::OutsideSupport);
    }
    match f.shape() {
        Shape::Constant => Ok(1.0),
        // Decreasing density: the sub-level set is the right tail.
        Shape::Decreasing => Ok(1.0 - f.cdf(x0)),
        Shape::Unimodal { mode } => {
            let target = f.pdf(x0);
            if x0 == mode || target >= f.pdf(mode) {
                return Ok(1.0);
            }
            let (a, b) = if x0 < mode {
                (x0, mirror_root(f, mode, target, x0, true)?)
            } else {
                (mirror_root(f, mode, target, x0, false)?, x0)
            };
            Ok(libm::fmin(f.cdf(a) + 1.0 - f.cdf(b), 1.0))
        }
    }
}

/// Root of `pdf(x) = target` on the monotone piece opposite `x0`.
fn mirror_root(f: &Density1D, mode: f64, target: f64, x0: f64, rightward: bool) -> Result<f64> {
    let (lo_sup, hi_sup) = f.support();
    let dir = if rightward { 1.0 } else { -1.0 };
    let limit = if rightward { hi_sup } else { lo_sup };
    let mut step = libm::fabs(mode - x0).max(1e-8);
    let mut far = mode + dir * step;
    // Expand until the pdf drops below the target (or the truncated support
    // edge is reached; its pdf is below any interior level of interest).
    for _ in 0..200 {
        if (rightward && far >= limit) || (!rightward && far <= limit) {
            far = limit;
            break;
        }
        if f.pdf(far) < target {
            break;
        }
        step *= 2.0;
        far = mode + dir * step;
    }
    if f.pdf(far) >= target {
        return Err(Error::BracketingFailure(format!(
            "pdf never drops below the level {target:e} on the {} side",
            if rightward { "right" } else { "left" }
        )));
    }
    // Bisect [near, far] (orientation-aware) down to ~1 ulp of the scale.
    let mut near = mode;
    for _ in 0..200 {
        let mid = 0.5 * (near + far);
        if mid == near || mid == far {
            break;
        }
        if f.pdf(mid) >= target {
            near = mid;
        } else {
            far = mid;
        }
        if libm::fabs(far - near) <= 1e-14 * (1.0 + libm::fabs(near)) {
            break;
        }
    }
    Ok(0.5 * (near + far))
}

/// One refinement step of the convergence demonstration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub width: f64,
    pub p_discrete: f64,
    pub p_continuous: f64,
    pub gap: f64,
}

/// Partition P-values along a nested sequence of widths, with the gap to the
/// continuous density P-value.
///
/// Widths must decrease and each must divide the previous (nested
/// refinements, e.g. halving), all sharing `anchor`.
pub fn convergence_sweep(
    f: &Density1D,
    x0: f64,
    widths: &[f64],
    anchor: f64,
) -> Result<Vec<ConvergenceRow>> {
    if widths.is_empty() {
        return Err(Error::InvalidConfig(format!("empty width sequence")));
    }
    for w in widths.windows(2) {
        let ratio = w[0] / w[1];
        if !(w[1] < w[0]) || libm::fabs(ratio - libm::round(ratio)) > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "widths must be nested divisor refinements (got {} then {})",
                w[0], w[1]
            )));
        }
    }
    let p_cont = continuous_density_pvalue(f, x0)?;
    let mut rows = Vec::with_capacity(widths.len());
    for &width in widths {
        let p_disc = partition_pvalue(f, &Partition1D::new(width, anchor)?, x0)?;
        rows.push(ConvergenceRow {
            width,
            p_discrete: p_disc,
            p_continuous: p_cont,
            gap: libm::fabs(p_disc - p_cont),
        });
    }
    Ok(rows)
}
