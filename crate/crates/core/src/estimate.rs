//! Density estimation and Monte-Carlo P-values from weighted draws.
//!
//! Each draw pairs a statistic value `t_i` with an inverse-distortion weight
//! `w_i`. A Gaussian-kernel estimate of the plain density is
//! `f_plain(t) = N^{-1} sum K_h(t - t_i)`; reusing the same kernel sums with
//! the weights gives `f_star(t) = N^{-1} sum w_i K_h(t - t_i)`, the
//! corrected density `f_T(t) E(J_T^{-1} | T = t)` up to the common constant
//! that cancels in P-value comparisons.
//!
//! P-values compare estimated density values at the draws against the value
//! at the observed point, with the same estimator on both sides (self-term
//! included); draw-point evaluation goes through linear interpolation on the
//! grid curve to keep the cost at `O(N + grid)` after accumulation.

use crate::error::{Error, Result};
use crate::math;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Kernel support cutoff in bandwidth units; `exp(-32)` is below roundoff
/// relative to any density scale of interest.
const KERNEL_CUTOFF: f64 = 8.0;

/// Monte-Carlo draws of a scalar statistic with inverse-distortion weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDraws {
    t: Vec<f64>,
    w: Vec<f64>,
    singular_count: usize,
}

impl WeightedDraws {
    /// Wrap draws, enforcing equal lengths, finite nonnegative weights, and
    /// the singular-draw budget (at most 0.1% of all attempted draws).
    pub fn new(t: Vec<f64>, w: Vec<f64>, singular_count: usize) -> Result<Self> {
        if t.len() != w.len() {
            return Err(Error::InvalidConfig(format!(
                "draw/weight length mismatch: {} vs {}",
                t.len(),
                w.len()
            )));
        }
        if t.is_empty() {
            return Err(Error::EmptySample);
        }
        for (i, v) in t.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
        }
        for (i, v) in w.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::NonFinite { index: i });
            }
        }
        let total = t.len() + singular_count;
        if singular_count * 1000 > total {
            return Err(Error::ExcessSingularDraws {
                singular: singular_count,
                total,
            });
        }
        Ok(WeightedDraws {
            t,
            w,
            singular_count,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.t
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn singular_count(&self) -> usize {
        self.singular_count
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Plain and corrected density estimates on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub f_plain: Vec<f64>,
    pub f_star: Vec<f64>,
    pub bandwidth: f64,
}

/// Silverman reference bandwidth `0.9 min(sd, IQR/1.34) N^{-1/5}`.
pub fn bandwidth_select(draws: &WeightedDraws) -> Result<f64> {
    silverman(draws.values())
}

pub(crate) fn silverman(t: &[f64]) -> Result<f64> {
    if t.len() < 100 {
        return Err(Error::InvalidConfig(format!(
            "bandwidth selection needs at least 100 draws, got {}",
            t.len()
        )));
    }
    let sd = math::sample_sd(t);
    let sorted = math::sorted_copy(t);
    let iqr = math::quantile_sorted(&sorted, 0.75) - math::quantile_sorted(&sorted, 0.25);
    let spread = libm::fmin(sd, iqr / 1.34);
    if !(spread > 0.0) {
        return Err(Error::ZeroSpread);
    }
    Ok(0.9 * spread * libm::pow(t.len() as f64, -0.2))
}

/// Uniform evaluation grid covering the draws (and any extra anchor points)
/// padded by four bandwidths on each side.
pub fn grid_covering(t: &[f64], extra: &[f64], bandwidth: f64, grid_size: usize) -> Vec<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in t.iter().chain(extra) {
        lo = libm::fmin(lo, v);
        hi = libm::fmax(hi, v);
    }
    lo -= 4.0 * bandwidth;
    hi += 4.0 * bandwidth;
    let n = grid_size.max(2);
    let step = (hi - lo) / (n as f64 - 1.0);
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Accumulate the plain and weighted kernel sums over a uniform grid.
///
/// Kernel contributions beyond eight bandwidths are dropped (below roundoff);
/// accumulation runs in draw order, so the curve is a deterministic function
/// of the draw sequence.
pub fn weighted_kde(draws: &WeightedDraws, bandwidth: f64, grid: Vec<f64>) -> Result<DensityCurve> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    let g = grid.len();
    if g < 2 {
        return Err(Error::InvalidConfig(format!("grid needs at least 2 nodes")));
    }
    let lo = grid[0];
    let step = grid[1] - grid[0];
    let mut plain = vec![0.0; g];
    let mut star = vec![0.0; g];
    let reach = KERNEL_CUTOFF * bandwidth;
    for (&ti, &wi) in draws.t.iter().zip(&draws.w) {
        let j_lo = libm::ceil((ti - reach - lo) / step).max(0.0) as usize;
        let j_hi = (libm::floor((ti + reach - lo) / step) as i64).min(g as i64 - 1);
        if j_hi < j_lo as i64 {
            continue;
        }
        for j in j_lo..=(j_hi as usize) {
            let z = (grid[j] - ti) / bandwidth;
            let k = libm::exp(-0.5 * z * z);
            plain[j] += k;
            star[j] += wi * k;
        }
    }
    let norm = 1.0 / (draws.len() as f64 * bandwidth * math::SQRT_2PI);
    for j in 0..g {
        plain[j] *= norm;
        star[j] *= norm;
    }
    Ok(DensityCurve {
        grid,
        f_plain: plain,
        f_star: star,
        bandwidth,
    })
}

#[derive(Clone, Copy)]
enum Which {
    Plain,
    Star,
}

impl DensityCurve {
    fn interp(&self, which: Which, t: f64) -> Option<f64> {
        let g = self.grid.len();
        if t < self.grid[0] || t > self.grid[g - 1] {
            return None;
        }
        let step = self.grid[1] - self.grid[0];
        let idx = libm::floor((t - self.grid[0]) / step) as usize;
        let idx = idx.min(g - 2);
        let frac = (t - self.grid[idx]) / step;
        let ys = match which {
            Which::Plain => &self.f_plain,
            Which::Star => &self.f_star,
        };
        Some(ys[idx] + frac * (ys[idx + 1] - ys[idx]))
    }

    /// Corrected-density value at `t` by linear interpolation on the grid.
    pub fn f_star_at(&self, t: f64) -> Option<f64> {
        self.interp(Which::Star, t)
    }

    /// Plain-density value at `t` by linear interpolation on the grid.
    pub fn f_plain_at(&self, t: f64) -> Option<f64> {
        self.interp(Which::Plain, t)
    }
}

/// Direct kernel-sum evaluation at one point, for points outside the grid.
fn direct_eval(draws: &WeightedDraws, bandwidth: f64, t: f64, which: Which) -> f64 {
    let mut acc = 0.0;
    for (&ti, &wi) in draws.t.iter().zip(&draws.w) {
        let z = (t - ti) / bandwidth;
        if libm::fabs(z) > KERNEL_CUTOFF {
            continue;
        }
        let k = libm::exp(-0.5 * z * z);
        acc += match which {
            Which::Plain => k,
            Which::Star => wi * k,
        };
    }
    acc / (draws.len() as f64 * bandwidth * math::SQRT_2PI)
}

fn density_pvalue(
    draws: &WeightedDraws,
    curve: &DensityCurve,
    t0: f64,
    which: Which,
) -> (f64, f64) {
    let threshold = curve
        .interp(which, t0)
        .unwrap_or_else(|| direct_eval(draws, curve.bandwidth, t0, which));
    let mut count = 0usize;
    for &ti in &draws.t {
        let fi = curve
            .interp(which, ti)
            .unwrap_or_else(|| direct_eval(draws, curve.bandwidth, ti, which));
        if fi <= threshold {
            count += 1;
        }
    }
    let n = draws.len() as f64;
    let p = count as f64 / n;
    (p, libm::sqrt(p * (1.0 - p) / n))
}

/// Invariant P-value estimate: the fraction of draws whose corrected-density
/// value does not exceed the corrected-density value at `t0`, with its
/// binomial standard error.
pub fn invariant_pvalue_mc(draws: &WeightedDraws, curve: &DensityCurve, t0: f64) -> (f64, f64) {
    density_pvalue(draws, curve, t0, Which::Star)
}

/// Plain density P-value estimate (no distortion correction).
pub fn plain_pvalue_mc(draws: &WeightedDraws, curve: &DensityCurve, t0: f64) -> (f64, f64) {
    density_pvalue(draws, curve, t0, Which::Plain)
}

/// Right-tail P-value `N^{-1} sum 1[t_i >= t0]`, for scalar statistics only.
pub fn tail_pvalue_mc(draws: &WeightedDraws, t0: f64) -> (f64, f64) {
    let n = draws.len() as f64;
    let count = draws.t.iter().filter(|&&ti| ti >= t0).count();
    let p = count as f64 / n;
    (p, libm::sqrt(p * (1.0 - p) / n))
}

// ---------------------------------------------------------------------------
// Grid-free evaluation for wide-range statistics.
//
// A uniform evaluation grid cannot resolve the bandwidth when a monotone
// reparameterization stretches the statistic's range by orders of magnitude
// (a 512-node grid over [0, 1e6] has spacing far above any sensible h).
// Binning the kernel centers at spacing h/4 keeps the same estimator (the
// quantization perturbs each center by at most h/8, far inside the kernel)
// while evaluation sums only the bins inside the kernel's support.

fn binned_density_pvalue(t: &[f64], w: &[f64], h: f64, t0: f64) -> (f64, f64) {
    let n = t.len();
    let delta = h / 4.0;
    let mut lo = t0;
    for &v in t {
        lo = libm::fmin(lo, v);
    }
    let bin_of = |x: f64| libm::floor((x - lo) / delta) as i64;
    let mut pairs: Vec<(i64, f64)> = t.iter().zip(w).map(|(&x, &wi)| (bin_of(x), wi)).collect();
    pairs.sort_by_key(|p| p.0);
    let mut centers: Vec<f64> = Vec::new();
    let mut masses: Vec<f64> = Vec::new();
    let mut last_bin = i64::MIN;
    for (bin, wi) in pairs {
        if bin != last_bin {
            centers.push(lo + (bin as f64 + 0.5) * delta);
            masses.push(wi);
            last_bin = bin;
        } else {
            *masses.last_mut().unwrap() += wi;
        }
    }
    let norm = 1.0 / (n as f64 * h * math::SQRT_2PI);
    let reach = KERNEL_CUTOFF * h;
    let eval = |x: f64| -> f64 {
        let i_lo = centers.partition_point(|&c| c < x - reach);
        let i_hi = centers.partition_point(|&c| c <= x + reach);
        let mut acc = 0.0;
        for j in i_lo..i_hi {
            let z = (x - centers[j]) / h;
            acc += masses[j] * libm::exp(-0.5 * z * z);
        }
        acc * norm
    };
    let threshold = eval(t0);
    let mut count = 0usize;
    for &x in t {
        if eval(x) <= threshold {
            count += 1;
        }
    }
    let nf = n as f64;
    let p = count as f64 / nf;
    (p, libm::sqrt(p * (1.0 - p) / nf))
}

/// Invariant P-value by grid-free binned kernel sums; use when the draw
/// range is too wide for [`weighted_kde`]'s uniform grid.
pub fn invariant_pvalue_mc_binned(draws: &WeightedDraws, bandwidth: f64, t0: f64) -> (f64, f64) {
    binned_density_pvalue(draws.values(), draws.weights(), bandwidth, t0)
}

/// Plain density P-value by grid-free binned kernel sums.
pub fn plain_pvalue_mc_binned(draws: &WeightedDraws, bandwidth: f64, t0: f64) -> (f64, f64) {
    let ones = vec![1.0; draws.len()];
    binned_density_pvalue(draws.values(), &ones, bandwidth, t0)
}

// ---------------------------------------------------------------------------
// Two-component statistics (product Gaussian kernel on a rectangular grid).

/// Draws of a two-component statistic with weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDraws2 {
    t1: Vec<f64>,
    t2: Vec<f64>,
    w: Vec<f64>,
    singular_count: usize,
}

impl WeightedDraws2 {
    pub fn new(t1: Vec<f64>, t2: Vec<f64>, w: Vec<f64>, singular_count: usize) -> Result<Self> {
        if t1.len() != t2.len() || t1.len() != w.len() {
            return Err(Error::InvalidConfig(format!("component length mismatch")));
        }
        if t1.is_empty() {
            return Err(Error::EmptySample);
        }
        for (i, v) in t1.iter().chain(&t2).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i % t1.len() });
            }
        }
        for (i, v) in w.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::NonFinite { index: i });
            }
        }
        let total = t1.len() + singular_count;
        if singular_count * 1000 > total {
            return Err(Error::ExcessSingularDraws {
                singular: singular_count,
                total,
            });
        }
        Ok(WeightedDraws2 {
            t1,
            t2,
            w,
            singular_count,
        })
    }

    pub fn first(&self) -> &[f64] {
        &self.t1
    }

    pub fn second(&self) -> &[f64] {
        &self.t2
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn singular_count(&self) -> usize {
        self.singular_count
    }

    pub fn len(&self) -> usize {
        self.t1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t1.is_empty()
    }

    /// Per-axis Silverman bandwidths.
    pub fn bandwidths(&self) -> Result<(f64, f64)> {
        Ok((silverman(&self.t1)?, silverman(&self.t2)?))
    }
}

/// Plain and corrected density estimates on a rectangular grid (row-major:
/// index `iy * nx + ix`).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid2 {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f_plain: Vec<f64>,
    pub f_star: Vec<f64>,
    pub bandwidth: (f64, f64),
}

/// Product-kernel estimate over a rectangular grid covering the draws,
/// padded by four bandwidths per axis.
pub fn weighted_kde_2d(
    draws: &WeightedDraws2,
    bandwidth: (f64, f64),
    extra: &[(f64, f64)],
    cells_per_axis: usize,
) -> Result<DensityGrid2> {
    let (hx, hy) = bandwidth;
    if !(hx > 0.0) || !(hy > 0.0) {
        return Err(Error::InvalidConfig(format!("bandwidths must be positive")));
    }
    let ex: Vec<f64> = extra.iter().map(|p| p.0).collect();
    let ey: Vec<f64> = extra.iter().map(|p| p.1).collect();
    let x = grid_covering(&draws.t1, &ex, hx, cells_per_axis);
    let y = grid_covering(&draws.t2, &ey, hy, cells_per_axis);
    let (nx, ny) = (x.len(), y.len());
    let dx = x[1] - x[0];
    let dy = y[1] - y[0];
    let mut plain = vec![0.0; nx * ny];
    let mut star = vec![0.0; nx * ny];
    let (rx, ry) = (KERNEL_CUTOFF * hx, KERNEL_CUTOFF * hy);
    for i in 0..draws.len() {
        let (t1, t2, wi) = (draws.t1[i], draws.t2[i], draws.w[i]);
        let jx_lo = libm::ceil((t1 - rx - x[0]) / dx).max(0.0) as usize;
        let jx_hi = (libm::floor((t1 + rx - x[0]) / dx) as i64).min(nx as i64 - 1);
        let jy_lo = libm::ceil((t2 - ry - y[0]) / dy).max(0.0) as usize;
        let jy_hi = (libm::floor((t2 + ry - y[0]) / dy) as i64).min(ny as i64 - 1);
        if jx_hi < jx_lo as i64 || jy_hi < jy_lo as i64 {
            continue;
        }
        for jy in jy_lo..=(jy_hi as usize) {
            let zy = (y[jy] - t2) / hy;
            let ky = libm::exp(-0.5 * zy * zy);
            let row = jy * nx;
            for jx in jx_lo..=(jx_hi as usize) {
                let zx = (x[jx] - t1) / hx;
                let k = ky * libm::exp(-0.5 * zx * zx);
                plain[row + jx] += k;
                star[row + jx] += wi * k;
            }
        }
    }
    let norm = 1.0 / (draws.len() as f64 * hx * hy * 2.0 * math::PI);
    for v in plain.iter_mut().chain(star.iter_mut()) {
        *v *= norm;
    }
    Ok(DensityGrid2 {
        x,
        y,
        f_plain: plain,
        f_star: star,
        bandwidth,
    })
}

impl DensityGrid2 {
    fn bilinear(&self, values: &[f64], t1: f64, t2: f64) -> Option<f64> {
        let (nx, ny) = (self.x.len(), self.y.len());
        if t1 < self.x[0] || t1 > self.x[nx - 1] || t2 < self.y[0] || t2 > self.y[ny - 1] {
            return None;
        }
        let dx = self.x[1] - self.x[0];
        let dy = self.y[1] - self.y[0];
        let ix = (libm::floor((t1 - self.x[0]) / dx) as usize).min(nx - 2);
        let iy = (libm::floor((t2 - self.y[0]) / dy) as usize).min(ny - 2);
        let fx = (t1 - self.x[ix]) / dx;
        let fy = (t2 - self.y[iy]) / dy;
        let v00 = values[iy * nx + ix];
        let v10 = values[iy * nx + ix + 1];
        let v01 = values[(iy + 1) * nx + ix];
        let v11 = values[(iy + 1) * nx + ix + 1];
        Some(v00 * (1.0 - fx) * (1.0 - fy) + v10 * fx * (1.0 - fy) + v01 * (1.0 - fx) * fy + v11 * fx * fy)
    }

    pub fn f_star_at(&self, t1: f64, t2: f64) -> Option<f64> {
        self.bilinear(&self.f_star, t1, t2)
    }

    pub fn f_plain_at(&self, t1: f64, t2: f64) -> Option<f64> {
        self.bilinear(&self.f_plain, t1, t2)
    }
}

fn direct_eval_2d(draws: &WeightedDraws2, bw: (f64, f64), t1: f64, t2: f64, star: bool) -> f64 {
    let (hx, hy) = bw;
    let mut acc = 0.0;
    for i in 0..draws.len() {
        let zx = (t1 - draws.t1[i]) / hx;
        let zy = (t2 - draws.t2[i]) / hy;
        if libm::fabs(zx) > KERNEL_CUTOFF || libm::fabs(zy) > KERNEL_CUTOFF {
            continue;
        }
        let k = libm::exp(-0.5 * (zx * zx + zy * zy));
        acc += if star { draws.w[i] * k } else { k };
    }
    acc / (draws.len() as f64 * hx * hy * 2.0 * math::PI)
}

fn density_pvalue_2d(
    draws: &WeightedDraws2,
    grid: &DensityGrid2,
    t0: (f64, f64),
    star: bool,
) -> (f64, f64) {
    let values = if star { &grid.f_star } else { &grid.f_plain };
    let threshold = grid
        .bilinear(values, t0.0, t0.1)
        .unwrap_or_else(|| direct_eval_2d(draws, grid.bandwidth, t0.0, t0.1, star));
    let mut count = 0usize;
    for i in 0..draws.len() {
        let fi = grid
            .bilinear(values, draws.t1[i], draws.t2[i])
            .unwrap_or_else(|| direct_eval_2d(draws, grid.bandwidth, draws.t1[i], draws.t2[i], star));
        if fi <= threshold {
            count += 1;
        }
    }
    let n = draws.len() as f64;
    let p = count as f64 / n;
    (p, libm::sqrt(p * (1.0 - p) / n))
}

/// Invariant P-value for a two-component statistic.
pub fn invariant_pvalue_mc_2d(
    draws: &WeightedDraws2,
    grid: &DensityGrid2,
    t0: (f64, f64),
) -> (f64, f64) {
    density_pvalue_2d(draws, grid, t0, true)
}

/// Plain density P-value for a two-component statistic.
pub fn plain_pvalue_mc_2d(
    draws: &WeightedDraws2,
    grid: &DensityGrid2,
    t0: (f64, f64),
) -> (f64, f64) {
    density_pvalue_2d(draws, grid, t0, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn normal_draws(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = SplitMix64::new(seed);
        (0..n).map(|_| rng.next_normal()).collect()
    }

    fn unit_weights(t: Vec<f64>) -> WeightedDraws {
        let w = vec![1.0; t.len()];
        WeightedDraws::new(t, w, 0).unwrap()
    }

    #[test]
    fn silverman_on_standard_normal() {
        let draws = unit_weights(normal_draws(100_000, 1));
        let h = bandwidth_select(&draws).unwrap();
        // 0.9 * min(sd, IQR/1.34) * N^{-1/5} with sd ~ 1.
        let expect = 0.9 * 100_000f64.powf(-0.2);
        assert!((h - expect).abs() < 0.01 * expect, "h = {h}");
    }

    #[test]
    fn silverman_scale_equivariant() {
        let t = normal_draws(5000, 2);
        let h1 = bandwidth_select(&unit_weights(t.clone())).unwrap();
        let scaled: Vec<f64> = t.iter().map(|v| 4.0 * v).collect();
        let h4 = bandwidth_select(&unit_weights(scaled)).unwrap();
        assert_eq!(h4, 4.0 * h1);
    }

    #[test]
    fn silverman_rejects_degenerate() {
        let draws = unit_weights(vec![1.0; 500]);
        assert_eq!(bandwidth_select(&draws).unwrap_err(), Error::ZeroSpread);
        let few = unit_weights(vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            bandwidth_select(&few).unwrap_err(),
            Error::InvalidConfig(_)
        ));
    }

    #[test]
    fn singular_budget_enforced() {
        let t = vec![0.0; 999];
        let w = vec![1.0; 999];
        assert!(matches!(
            WeightedDraws::new(t, w, 2).unwrap_err(),
            Error::ExcessSingularDraws { .. }
        ));
    }

    #[test]
    fn unit_weights_collapse_correction() {
        let draws = unit_weights(normal_draws(2000, 3));
        let h = 0.2;
        let grid = grid_covering(draws.values(), &[], h, 256);
        let curve = weighted_kde(&draws, h, grid).unwrap();
        assert_eq!(curve.f_plain, curve.f_star);
    }

    #[test]
    fn constant_weights_scale_linearly() {
        let t = normal_draws(2000, 4);
        let h = 0.2;
        let grid = grid_covering(&t, &[], h, 256);
        let unit = weighted_kde(&unit_weights(t.clone()), h, grid.clone()).unwrap();
        // Power-of-two constants scale exactly.
        let w2 = WeightedDraws::new(t.clone(), vec![2.0; t.len()], 0).unwrap();
        let double = weighted_kde(&w2, h, grid.clone()).unwrap();
        for (a, b) in unit.f_star.iter().zip(&double.f_star) {
            assert_eq!(2.0 * a, *b);
        }
        // Arbitrary constants to roundoff.
        let w3 = WeightedDraws::new(t.clone(), vec![3.0; t.len()], 0).unwrap();
        let triple = weighted_kde(&w3, h, grid).unwrap();
        for (a, b) in unit.f_star.iter().zip(&triple.f_star) {
            assert!((3.0 * a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn kde_recovers_standard_normal() {
        let t = normal_draws(200_000, 5);
        let draws = unit_weights(t);
        let h = bandwidth_select(&draws).unwrap();
        let grid: Vec<f64> = (0..401).map(|i| -4.0 + 0.02 * i as f64).collect();
        let curve = weighted_kde(&draws, h, grid).unwrap();
        let mut worst = 0.0f64;
        for (g, f) in curve.grid.iter().zip(&curve.f_plain) {
            worst = worst.max((f - math::normal_pdf(*g)).abs());
        }
        assert!(worst < 0.01, "max |f_hat - phi| = {worst}");
    }

    #[test]
    fn plain_integrates_to_one() {
        let draws = unit_weights(normal_draws(50_000, 6));
        let h = bandwidth_select(&draws).unwrap();
        let grid = grid_covering(draws.values(), &[], h, 512);
        let curve = weighted_kde(&draws, h, grid).unwrap();
        let step = curve.grid[1] - curve.grid[0];
        let mut integral = 0.0;
        for j in 0..curve.grid.len() - 1 {
            integral += 0.5 * (curve.f_plain[j] + curve.f_plain[j + 1]) * step;
        }
        assert!((integral - 1.0).abs() < 0.05, "integral {integral}");
    }

    #[test]
    fn pvalues_at_extremes() {
        let draws = unit_weights(normal_draws(5000, 7));
        let min = draws.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = draws
            .values()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let (p_min, _) = tail_pvalue_mc(&draws, min);
        let (p_max, _) = tail_pvalue_mc(&draws, max);
        assert_eq!(p_min, 1.0);
        assert_eq!(p_max, 1.0 / 5000.0);
    }

    #[test]
    fn plain_pvalue_normal_quantile() {
        let draws = unit_weights(normal_draws(200_000, 8));
        let h = bandwidth_select(&draws).unwrap();
        let grid = grid_covering(draws.values(), &[1.96], h, 512);
        let curve = weighted_kde(&draws, h, grid).unwrap();
        let (p, se) = plain_pvalue_mc(&draws, &curve, 1.96);
        let exact = 2.0 * math::normal_sf(1.96);
        assert!((p - exact).abs() < 3.0 * se + 0.003, "p = {p}, exact {exact}");
        let (p0, _) = plain_pvalue_mc(&draws, &curve, 0.0);
        assert!(p0 > 0.97, "mode p-value {p0}");
    }

    #[test]
    fn invariant_equals_plain_for_unit_weights() {
        let draws = unit_weights(normal_draws(20_000, 9));
        let h = bandwidth_select(&draws).unwrap();
        let grid = grid_covering(draws.values(), &[0.7], h, 512);
        let curve = weighted_kde(&draws, h, grid).unwrap();
        assert_eq!(
            invariant_pvalue_mc(&draws, &curve, 0.7),
            plain_pvalue_mc(&draws, &curve, 0.7)
        );
    }

    #[test]
    fn weight_rescaling_is_exact() {
        // Positive rescaling scales both sides of the comparison; powers of
        // two are bit-exact.
        let t = normal_draws(20_000, 10);
        let w: Vec<f64> = t.iter().map(|v| 1.0 + v.abs()).collect();
        let scaled: Vec<f64> = w.iter().map(|v| 4.0 * v).collect();
        let d1 = WeightedDraws::new(t.clone(), w, 0).unwrap();
        let d2 = WeightedDraws::new(t, scaled, 0).unwrap();
        let h = bandwidth_select(&d1).unwrap();
        let grid = grid_covering(d1.values(), &[1.3], h, 512);
        let c1 = weighted_kde(&d1, h, grid.clone()).unwrap();
        let c2 = weighted_kde(&d2, h, grid).unwrap();
        assert_eq!(
            invariant_pvalue_mc(&d1, &c1, 1.3),
            invariant_pvalue_mc(&d2, &c2, 1.3)
        );
    }

    #[test]
    fn modal_t0_is_least_surprising() {
        let draws = unit_weights(normal_draws(50_000, 11));
        let h = bandwidth_select(&draws).unwrap();
        let grid = grid_covering(draws.values(), &[], h, 512);
        let curve = weighted_kde(&draws, h, grid).unwrap();
        // argmax of f_star over the draws
        let mut best = draws.values()[0];
        let mut best_f = f64::NEG_INFINITY;
        for &ti in draws.values() {
            let f = curve.f_star_at(ti).unwrap();
            if f > best_f {
                best_f = f;
                best = ti;
            }
        }
        let (p_mode, _) = invariant_pvalue_mc(&draws, &curve, best);
        for &t0 in &[0.5, -1.0, 2.0, best + 0.3] {
            let (p, _) = invariant_pvalue_mc(&draws, &curve, t0);
            assert!(p_mode >= p, "mode p {p_mode} < p({t0}) = {p}");
        }
    }

    #[test]
    fn median_t0_is_near_top() {
        // The empirical median of symmetric unimodal draws is among the
        // least surprising points. Estimator noise near the flat mode keeps
        // its P-value away from exactly 1: draws whose density estimate
        // fluctuates above the value at the median are counted out, so the
        // honest bound is "large", not "within Monte-Carlo error of 1".
        let sorted = math::sorted_copy(&normal_draws(50_000, 12));
        let median = math::quantile_sorted(&sorted, 0.5);
        let draws = unit_weights(sorted);
        let h = bandwidth_select(&draws).unwrap();
        let grid = grid_covering(draws.values(), &[], h, 512);
        let curve = weighted_kde(&draws, h, grid).unwrap();
        let (p, _) = invariant_pvalue_mc(&draws, &curve, median);
        assert!(p > 0.8, "median p-value {p}");
        // And it beats clearly off-mode points.
        let (p_off, _) = invariant_pvalue_mc(&draws, &curve, 1.0);
        assert!(p > p_off, "median {p} vs t0=1: {p_off}");
    }

    #[test]
    fn tail_pvalue_needs_scalar() {
        // The 2-D pipeline has no tail notion by construction: the API only
        // offers density-based P-values for WeightedDraws2.
        let d = WeightedDraws2::new(vec![0.0; 3], vec![0.0; 3], vec![1.0; 3], 0).unwrap();
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn t0_outside_hull_evaluated_directly() {
        // A point far beyond the draws gets a direct kernel evaluation
        // (zero here), making it maximally surprising.
        let draws = unit_weights(normal_draws(5000, 19));
        let h = bandwidth_select(&draws).unwrap();
        let grid = grid_covering(draws.values(), &[], h, 256);
        let curve = weighted_kde(&draws, h, grid).unwrap();
        let far = 50.0;
        assert!(curve.f_star_at(far).is_none());
        let (p, _) = invariant_pvalue_mc(&draws, &curve, far);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn binned_agrees_with_grid_when_resolvable() {
        let t = normal_draws(50_000, 20);
        let w: Vec<f64> = t.iter().map(|v| 1.0 + 0.3 * v.abs()).collect();
        let draws = WeightedDraws::new(t, w, 0).unwrap();
        let h = bandwidth_select(&draws).unwrap();
        let grid = grid_covering(draws.values(), &[1.1], h, 4096);
        let curve = weighted_kde(&draws, h, grid).unwrap();
        let (pg, _) = invariant_pvalue_mc(&draws, &curve, 1.1);
        let (pb, _) = invariant_pvalue_mc_binned(&draws, h, 1.1);
        assert!((pg - pb).abs() < 0.01, "grid {pg} vs binned {pb}");
    }

    #[test]
    fn binned_handles_stretched_scale() {
        // X ~ N(3,1) pushed through the cube: the range explodes, so no
        // uniform grid resolves h. With the inverse-distortion weights
        // |dT/dx| = 3x^2 the corrected density recovers the base density,
        // whose level sets are two-sided around the base mode x = 3.
        let x: Vec<f64> = normal_draws(20_000, 21).iter().map(|v| 3.0 + v).collect();
        let t: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        let w: Vec<f64> = x.iter().map(|v| 3.0 * v * v).collect();
        let draws = WeightedDraws::new(t, w, 0).unwrap();
        let h = bandwidth_select(&draws).unwrap();
        let (p_mode, _) = invariant_pvalue_mc_binned(&draws, h, 27.0);
        let (p_tail, _) = invariant_pvalue_mc_binned(&draws, h, 5.848f64.powi(3));
        assert!(p_mode > 0.9, "base-mode p {p_mode}");
        // Exact base P-value 2(1 - Phi(2.848)) ~ 0.0044.
        assert!(p_tail < 0.02, "tail p {p_tail}");
    }

    #[test]
    fn kde_2d_product_kernel_normalizes() {
        let mut rng = SplitMix64::new(13);
        let n = 40_000;
        let mut t1 = Vec::with_capacity(n);
        let mut t2 = Vec::with_capacity(n);
        for _ in 0..n {
            let (a, b) = rng.next_normal_pair();
            t1.push(a);
            t2.push(0.5 * a + b);
        }
        let draws = WeightedDraws2::new(t1, t2, vec![1.0; n], 0).unwrap();
        let bw = draws.bandwidths().unwrap();
        let grid = weighted_kde_2d(&draws, bw, &[], 96).unwrap();
        let dx = grid.x[1] - grid.x[0];
        let dy = grid.y[1] - grid.y[0];
        let total: f64 = grid.f_plain.iter().sum::<f64>() * dx * dy;
        assert!((total - 1.0).abs() < 0.05, "mass {total}");
        // Mode of the fitted surface should be near the origin.
        let (p_origin, _) = invariant_pvalue_mc_2d(&draws, &grid, (0.0, 0.0));
        assert!(p_origin > 0.9, "origin p {p_origin}");
    }
}
