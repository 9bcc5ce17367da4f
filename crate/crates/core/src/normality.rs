//! End-to-end normality checking against the conditional distribution given
//! the minimal sufficient statistic.
//!
//! For a normal sample the sufficient statistic is `(mean, residual length)`
//! and the leftover randomness is the residual direction `d`, uniform on the
//! centered sphere. A discrepancy statistic `T` of `d` is checked by
//! simulating directions, weighting each draw by the inverse fiber
//! distortion of the composed map, and comparing corrected density values at
//! the draws against the observed point. The report carries the invariant
//! P-value alongside the uncorrected density P-value, and for Jarque-Bera
//! also the right-tail and asymptotic chi-square(2) P-values for contrast.
//!
//! Because the whole pipeline sees the data only through `d`, the report is
//! exactly invariant under positive affine maps of the data.

use crate::closed_forms::jb_asymptotic_pvalue;
use crate::contour::{self, Polyline};
use crate::distortion::{
    generic_inverse_distortion, inv_distortion_jarque_bera, inv_distortion_t3t4, jarque_bera,
    power_sum, shapiro_wilk, StatisticDef,
};
use crate::error::{Error, Result};
use crate::estimate::{
    self, DensityCurve, DensityGrid2, WeightedDraws, WeightedDraws2,
};
use crate::math;
use crate::sample::{McEcho, MonteCarloConfig, PValueReport, Sample, ScalarOrPair};
use crate::sampler::{draw_chunk, standardize, UnitResidual};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// 2-D estimation grid resolution (cells per axis).
const GRID_2D: usize = 128;

/// Discrepancy statistics available for the normal check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalStatistic {
    /// Jarque-Bera skewness/kurtosis combination (scalar).
    JarqueBera,
    /// The joint third and fourth power sums (two components).
    T3T4,
    /// Shapiro-Wilk W (scalar, finite-difference distortion).
    ShapiroWilk,
}

impl NormalStatistic {
    pub fn name(self) -> &'static str {
        match self {
            NormalStatistic::JarqueBera => "jb",
            NormalStatistic::T3T4 => "t3t4",
            NormalStatistic::ShapiroWilk => "sw",
        }
    }

    /// Minimum sample size: the degree-8 distortion polynomials need
    /// headroom, Shapiro-Wilk only needs a direction.
    fn min_n(self) -> usize {
        match self {
            NormalStatistic::JarqueBera | NormalStatistic::T3T4 => 8,
            NormalStatistic::ShapiroWilk => 3,
        }
    }
}

/// A normality-check request.
#[derive(Debug, Clone)]
pub struct NormalCheckRequest {
    pub data: Sample,
    pub statistic: NormalStatistic,
    pub config: MonteCarloConfig,
}

/// Density estimate accompanying a report: a curve for scalar statistics, a
/// surface for the joint check.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckCurve {
    Curve1D(DensityCurve),
    Grid2D(DensityGrid2),
}

/// Report plus the density estimate it was read off.
#[derive(Debug, Clone)]
pub struct NormalCheckOutput {
    pub report: PValueReport,
    pub curve: CheckCurve,
}

/// Simulate directions chunk by chunk and map each to `(t, w)`; singular
/// fiber points are dropped and counted.
fn simulate_scalar<F>(
    n: usize,
    config: &MonteCarloConfig,
    stat: F,
) -> Result<(Vec<f64>, Vec<f64>, usize)>
where
    F: Fn(&UnitResidual) -> Result<(f64, f64)>,
{
    let mut t = Vec::with_capacity(config.n_sim);
    let mut w = Vec::with_capacity(config.n_sim);
    let mut singular = 0usize;
    let mut remaining = config.n_sim;
    let mut chunk = 0u64;
    while remaining > 0 {
        let count = remaining.min(config.chunk_size);
        for d in draw_chunk(n, config.seed, chunk, count) {
            match stat(&d) {
                Ok((ti, wi)) => {
                    t.push(ti);
                    w.push(wi);
                }
                Err(Error::SingularFiberPoint) => singular += 1,
                Err(e) => return Err(e),
            }
        }
        remaining -= count;
        chunk += 1;
    }
    Ok((t, w, singular))
}

/// Run the normality check.
pub fn check_normal(request: &NormalCheckRequest) -> Result<NormalCheckOutput> {
    request.config.validate_for_report()?;
    let n = request.data.n();
    let min_n = request.statistic.min_n();
    if n < min_n {
        return Err(Error::TooFewObservations {
            needed: min_n,
            got: n,
        });
    }
    let d0 = standardize(&request.data)?;
    match request.statistic {
        NormalStatistic::JarqueBera => check_scalar(
            request,
            &d0,
            jarque_bera(&d0),
            |d| Ok((jarque_bera(d), inv_distortion_jarque_bera(d)?)),
            true,
        ),
        NormalStatistic::ShapiroWilk => {
            // W is affine invariant, so W(x) = W(d(x)) pointwise and the
            // composed-map differential is just the differential of W itself,
            // taken at the ambient point d (mean 0, length 1).
            let sw_eval = |x: &[f64]| {
                let w = Sample::new(x.to_vec())
                    .and_then(|s| shapiro_wilk(&s))
                    .unwrap_or(f64::NAN);
                ScalarOrPair::Scalar(w)
            };
            let t0 = shapiro_wilk(&Sample::new(d0.coords().to_vec())?)?;
            check_scalar(
                request,
                &d0,
                t0,
                |d| {
                    let t = shapiro_wilk(&Sample::new(d.coords().to_vec())?)?;
                    let stat = StatisticDef {
                        name: "sw",
                        dim_out: 1,
                        eval: &sw_eval,
                    };
                    let w = generic_inverse_distortion(&stat, d.coords(), 1e-5)?;
                    Ok((t, w))
                },
                false,
            )
        }
        NormalStatistic::T3T4 => check_t3t4(request, &d0),
    }
}

fn check_scalar<F>(
    request: &NormalCheckRequest,
    d0: &UnitResidual,
    t0: f64,
    stat: F,
    jb_extras: bool,
) -> Result<NormalCheckOutput>
where
    F: Fn(&UnitResidual) -> Result<(f64, f64)>,
{
    let config = &request.config;
    let (t, w, singular) = simulate_scalar(d0.n(), config, stat)?;
    let draws = WeightedDraws::new(t, w, singular)?;
    let bandwidth = match config.bandwidth {
        Some(h) => h,
        None => estimate::bandwidth_select(&draws)?,
    };
    let grid = estimate::grid_covering(draws.values(), &[t0], bandwidth, config.grid_size);
    let curve = estimate::weighted_kde(&draws, bandwidth, grid)?;
    let (p_invariant, se) = estimate::invariant_pvalue_mc(&draws, &curve, t0);
    let (p_plain, _) = estimate::plain_pvalue_mc(&draws, &curve, t0);
    let (p_tail, p_asymptotic) = if jb_extras {
        let (pt, _) = estimate::tail_pvalue_mc(&draws, t0);
        (Some(pt), Some(jb_asymptotic_pvalue(t0)))
    } else {
        (None, None)
    };
    let report = PValueReport {
        statistic_name: String::from(request.statistic.name()),
        t_observed: ScalarOrPair::Scalar(t0),
        p_invariant,
        p_plain: Some(p_plain),
        p_measured: None,
        p_tail,
        p_asymptotic,
        mc: Some(McEcho {
            mc_standard_error: se,
            n_sim: config.n_sim,
            seed: config.seed,
            chunk_size: config.chunk_size,
            bandwidth: Some(ScalarOrPair::Scalar(bandwidth)),
            singular_draws: draws.singular_count(),
        }),
    };
    report.check()?;
    Ok(NormalCheckOutput {
        report,
        curve: CheckCurve::Curve1D(curve),
    })
}

fn check_t3t4(request: &NormalCheckRequest, d0: &UnitResidual) -> Result<NormalCheckOutput> {
    let config = &request.config;
    let t0 = (power_sum(d0, 3), power_sum(d0, 4));
    let (draws, singular) = simulate_t3t4(d0.n(), config)?;
    let _ = singular;
    let bandwidth = match config.bandwidth {
        Some(h) => (h, h),
        None => draws.bandwidths()?,
    };
    let grid = estimate::weighted_kde_2d(&draws, bandwidth, &[t0], GRID_2D)?;
    let (p_invariant, se) = estimate::invariant_pvalue_mc_2d(&draws, &grid, t0);
    let (p_plain, _) = estimate::plain_pvalue_mc_2d(&draws, &grid, t0);
    let report = PValueReport {
        statistic_name: String::from(request.statistic.name()),
        t_observed: ScalarOrPair::Pair(t0.0, t0.1),
        p_invariant,
        p_plain: Some(p_plain),
        p_measured: None,
        p_tail: None,
        p_asymptotic: None,
        mc: Some(McEcho {
            mc_standard_error: se,
            n_sim: config.n_sim,
            seed: config.seed,
            chunk_size: config.chunk_size,
            bandwidth: Some(ScalarOrPair::Pair(bandwidth.0, bandwidth.1)),
            singular_draws: draws.singular_count(),
        }),
    };
    report.check()?;
    Ok(NormalCheckOutput {
        report,
        curve: CheckCurve::Grid2D(grid),
    })
}

fn simulate_t3t4(n: usize, config: &MonteCarloConfig) -> Result<(WeightedDraws2, usize)> {
    let mut t1 = Vec::with_capacity(config.n_sim);
    let mut t2 = Vec::with_capacity(config.n_sim);
    let mut w = Vec::with_capacity(config.n_sim);
    let mut singular = 0usize;
    let mut remaining = config.n_sim;
    let mut chunk = 0u64;
    while remaining > 0 {
        let count = remaining.min(config.chunk_size);
        for d in draw_chunk(n, config.seed, chunk, count) {
            match inv_distortion_t3t4(&d) {
                Ok(wi) => {
                    t1.push(power_sum(&d, 3));
                    t2.push(power_sum(&d, 4));
                    w.push(wi);
                }
                Err(Error::SingularFiberPoint) => singular += 1,
                Err(e) => return Err(e),
            }
        }
        remaining -= count;
        chunk += 1;
    }
    let draws = WeightedDraws2::new(t1, t2, w, singular)?;
    Ok((draws, singular))
}

/// The three level-`alpha` acceptance contours in the (T3, T4) plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSet {
    /// Contour of the invariant (corrected-density) P-value.
    pub invariant: Vec<Polyline>,
    /// Contour of the plain density P-value.
    pub plain: Vec<Polyline>,
    /// The asymptotic Jarque-Bera acceptance boundary: the exact algebraic
    /// curve `n (n T3^2/6 + (n T4 - 3)^2/24) = q` at the chi-square(2)
    /// quantile `q` for level `alpha`.
    pub jb_asymptotic: Polyline,
    /// The density surface the estimated contours were extracted from.
    pub grid: DensityGrid2,
}

/// Estimate the level-`alpha` P-value contours of the joint (T3, T4) check
/// for sample size `n`.
///
/// One large simulation estimates the corrected and plain surfaces; each
/// grid node is assigned the P-value of its density value by ranking it
/// against the draws, and the `alpha` level curve is extracted by marching
/// squares on that P-value grid.
pub fn alpha_contour_t3t4(n: usize, alpha: f64, config: &MonteCarloConfig) -> Result<ContourSet> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha must be in (0,1)")));
    }
    if n < 8 {
        return Err(Error::TooFewObservations { needed: 8, got: n });
    }
    config.validate_for_report()?;
    // The level must be supported by enough draws on each side.
    let nf = config.n_sim as f64;
    if alpha * nf < 10.0 || (1.0 - alpha) * nf < 10.0 {
        return Err(Error::UnresolvableLevel {
            alpha,
            lo: 10.0 / nf,
            hi: 1.0 - 10.0 / nf,
        });
    }
    let (draws, _) = simulate_t3t4(n, config)?;
    let bandwidth = match config.bandwidth {
        Some(h) => (h, h),
        None => draws.bandwidths()?,
    };
    let grid = estimate::weighted_kde_2d(&draws, bandwidth, &[], GRID_2D)?;

    let invariant = pvalue_contour(&draws, &grid, alpha, true)?;
    let plain = pvalue_contour(&draws, &grid, alpha, false)?;

    // Exact algebraic overlay: T3 = sqrt(6q)/n cos, T4 = 3/n +
    // sqrt(24q/n^3) sin.
    let q = math::chisq2_quantile(1.0 - alpha);
    let nf = n as f64;
    let a = libm::sqrt(6.0 * q) / nf;
    let b = libm::sqrt(24.0 * q / (nf * nf * nf));
    let mut overlay = Vec::with_capacity(257);
    for j in 0..=256 {
        let theta = 2.0 * math::PI * j as f64 / 256.0;
        overlay.push((a * libm::cos(theta), 3.0 / nf + b * libm::sin(theta)));
    }

    Ok(ContourSet {
        invariant,
        plain,
        jb_asymptotic: overlay,
        grid,
    })
}

/// P-value of each grid node by ranking its density value against the
/// draws' density values, then the alpha level curve.
fn pvalue_contour(
    draws: &WeightedDraws2,
    grid: &DensityGrid2,
    alpha: f64,
    star: bool,
) -> Result<Vec<Polyline>> {
    let values = if star { &grid.f_star } else { &grid.f_plain };
    let mut at_draws: Vec<f64> = Vec::with_capacity(draws.len());
    for i in 0..draws.len() {
        let f = if star {
            grid.f_star_at(draws.first()[i], draws.second()[i])
        } else {
            grid.f_plain_at(draws.first()[i], draws.second()[i])
        };
        at_draws.push(f.unwrap_or(0.0));
    }
    at_draws.sort_by(f64::total_cmp);
    let m = at_draws.len() as f64;
    let pv_of = |fval: f64| -> f64 {
        // count of draws with density value <= fval
        let mut lo = 0usize;
        let mut hi = at_draws.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if at_draws[mid] <= fval {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo as f64 / m
    };
    let pv: Vec<f64> = values.iter().map(|&f| pv_of(f)).collect();
    let (lo, hi) = pv
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
            (libm::fmin(lo, p), libm::fmax(hi, p))
        });
    if alpha <= lo || alpha >= hi {
        return Err(Error::UnresolvableLevel { alpha, lo, hi });
    }
    Ok(contour::march(&grid.x, &grid.y, &pv, alpha))
}
