//! Discrepancy statistics and their fiber volume-distortion factors.
//!
//! A smooth statistic `T` stretches volume along its fibers by
//! `J_T(x) = |det(dT(x) dT'(x))|^{-1/2}`; the corrected density divides this
//! factor out, so Monte-Carlo draws are weighted by the *inverse* distortion
//! `J_T^{-1}(x) = |det(dT(x) dT'(x))|^{1/2}`.
//!
//! For power sums of the residual direction and for Jarque-Bera the inverse
//! distortion has closed forms (degree-8 polynomials in the coordinates);
//! anything else (Shapiro-Wilk here) goes through central finite differences
//! of the composed ambient map.
//!
//! Convention: all closed forms fix the residual length `r` to 1. Within the
//! conditional distribution given the sufficient statistic, `r` is constant,
//! so it scales every weight by the same factor and cancels in the P-value
//! comparison; evaluating generic statistics at the ambient point `x = d`
//! (mean 0, length 1) makes the finite-difference route directly comparable.

use crate::error::{Error, Result};
use crate::math;
use crate::sample::{Sample, ScalarOrPair};
use crate::sampler::UnitResidual;
use alloc::vec;
use alloc::vec::Vec;

/// Power sum `T_p(d) = sum_i d_i^p`.
///
/// Centering forces `T_1 = 0` and unit norm forces `T_2 = 1`.
pub fn power_sum(d: &UnitResidual, p: u32) -> f64 {
    assert!(p >= 1, "power sums need p >= 1");
    let mut s = 0.0;
    for &v in d.coords() {
        s += powi(v, p);
    }
    s
}

#[inline]
fn powi(x: f64, p: u32) -> f64 {
    let mut acc = 1.0;
    let mut base = x;
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// Jarque-Bera statistic `n (n T_3^2 / 6 + (n T_4 - 3)^2 / 24)` of a
/// residual direction.
pub fn jarque_bera(d: &UnitResidual) -> f64 {
    let n = d.n() as f64;
    let t3 = power_sum(d, 3);
    let t4 = power_sum(d, 4);
    n * (n * t3 * t3 / 6.0 + (n * t4 - 3.0) * (n * t4 - 3.0) / 24.0)
}

/// Inverse distortion of `T_p` composed with the direction map, at `r = 1`:
/// `p (T_{2p-2} - T_{p-1}^2 / n - T_p^2)^{1/2}`.
///
/// Fails as a singular fiber point when the bracket is not positive; for
/// `p = 2` the statistic is constant on the sphere and always singular.
pub fn inv_distortion_power_sum(d: &UnitResidual, p: u32) -> Result<f64> {
    assert!(p >= 2, "the p = 1 power sum is identically zero on directions");
    let n = d.n() as f64;
    let t2p2 = power_sum(d, 2 * p - 2);
    let tpm1 = power_sum(d, p - 1);
    let tp = power_sum(d, p);
    let bracket = t2p2 - tpm1 * tpm1 / n - tp * tp;
    // Roundoff floor: constant statistics (p = 2) leave residue ~1e-16.
    if bracket <= 1e-12 * libm::fmax(1.0, t2p2) {
        return Err(Error::SingularFiberPoint);
    }
    Ok(p as f64 * libm::sqrt(bracket))
}

/// Inverse distortion of Jarque-Bera composed with the direction map, at
/// `r = 1`: `n^2 sqrt(bracket)` with the degree-8 bracket
/// `(n T4/3 - 1)^2 T6 + 2 (n T4/3 - 1) T3 T5 - (T3^2 + n T4^2/3 - T4)^2
///  + T3^2 T4 - n T3^2 T4^2 / 9`.
///
/// The bracket vanishes exactly at the statistic's minimum (`T3 = 0`,
/// `T4 = 3/n`), where the fiber degenerates to a point.
pub fn inv_distortion_jarque_bera(d: &UnitResidual) -> Result<f64> {
    let n = d.n() as f64;
    let t3 = power_sum(d, 3);
    let t4 = power_sum(d, 4);
    let t5 = power_sum(d, 5);
    let t6 = power_sum(d, 6);
    let a = n * t4 / 3.0 - 1.0;
    let b = t3 * t3 + n * t4 * t4 / 3.0 - t4;
    let bracket = a * a * t6 + 2.0 * a * t3 * t5 - b * b + t3 * t3 * t4 - n * t3 * t3 * t4 * t4 / 9.0;
    if bracket <= 0.0 {
        return Err(Error::SingularFiberPoint);
    }
    Ok(n * n * libm::sqrt(bracket))
}

/// Ambient gradient of `T_p` composed with the direction map, at the point
/// `x = d` (so `r = 1`): `p (d^{p-1} - (T_{p-1}/n) 1 - T_p d)`.
pub fn power_sum_gradient(d: &UnitResidual, p: u32) -> Vec<f64> {
    let n = d.n() as f64;
    let tpm1 = power_sum(d, p - 1);
    let tp = power_sum(d, p);
    d.coords()
        .iter()
        .map(|&v| p as f64 * (powi(v, p - 1) - tpm1 / n - tp * v))
        .collect()
}

/// Inverse distortion of the two-component statistic `(T_3, T_4)` of the
/// direction, via the 2x2 Gram determinant of the analytic gradients.
pub fn inv_distortion_t3t4(d: &UnitResidual) -> Result<f64> {
    let g3 = power_sum_gradient(d, 3);
    let g4 = power_sum_gradient(d, 4);
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for i in 0..g3.len() {
        a += g3[i] * g3[i];
        b += g3[i] * g4[i];
        c += g4[i] * g4[i];
    }
    let det = a * c - b * b;
    if det <= 0.0 {
        return Err(Error::SingularFiberPoint);
    }
    Ok(libm::sqrt(det))
}

/// A discrepancy statistic for the generic finite-difference route.
///
/// `eval` must be smooth at the evaluation point; for statistics of the
/// residual direction it evaluates the composed map on the ambient
/// coordinates.
pub struct StatisticDef<'a> {
    pub name: &'a str,
    pub dim_out: u8,
    pub eval: &'a dyn Fn(&[f64]) -> ScalarOrPair,
}

/// Inverse distortion `|det(dT dT')|^{1/2}` by central finite differences,
/// with per-coordinate step `step * (1 + |x_j|)`.
///
/// For a scalar statistic this is the Euclidean norm of the gradient; for a
/// two-component statistic, the square root of the 2x2 Gram determinant of
/// the difference quotients.
pub fn generic_inverse_distortion(stat: &StatisticDef, x: &[f64], step: f64) -> Result<f64> {
    let n = x.len();
    let mut rows = vec![vec![0.0; n]; stat.dim_out as usize];
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = step * (1.0 + libm::fabs(x[j]));
        let orig = x[j];
        xp[j] = orig + h;
        let fp = (stat.eval)(&xp);
        xp[j] = orig - h;
        let fm = (stat.eval)(&xp);
        xp[j] = orig;
        match (fp, fm, stat.dim_out) {
            (ScalarOrPair::Scalar(p), ScalarOrPair::Scalar(m), 1) => {
                rows[0][j] = (p - m) / (2.0 * h);
            }
            (ScalarOrPair::Pair(p1, p2), ScalarOrPair::Pair(m1, m2), 2) => {
                rows[0][j] = (p1 - m1) / (2.0 * h);
                rows[1][j] = (p2 - m2) / (2.0 * h);
            }
            _ => {
                return Err(Error::InvalidConfig(alloc::format!(
                    "statistic `{}` returned a value inconsistent with dim_out {}",
                    stat.name,
                    stat.dim_out
                )))
            }
        }
        if rows.iter().any(|r| !r[j].is_finite()) {
            return Err(Error::NonFiniteDifference);
        }
    }
    match stat.dim_out {
        1 => {
            let mut s = 0.0;
            for &g in &rows[0] {
                s += g * g;
            }
            Ok(libm::sqrt(s))
        }
        2 => {
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for j in 0..n {
                a += rows[0][j] * rows[0][j];
                b += rows[0][j] * rows[1][j];
                c += rows[1][j] * rows[1][j];
            }
            let det = a * c - b * b;
            if det < 0.0 {
                return Err(Error::NonFiniteDifference);
            }
            Ok(libm::sqrt(det))
        }
        _ => Err(Error::InvalidConfig(alloc::format!(
            "dim_out must be 1 or 2, got {}",
            stat.dim_out
        ))),
    }
}

/// Shapiro-Wilk W statistic, 3 <= n <= 5000.
///
/// Coefficients follow Royston's AS R94 approximation (the one behind R's
/// `shapiro.test`): Blom-score normal quantiles, polynomial corrections for
/// the one or two extreme weights, the rest rescaled to unit norm. Only the
/// statistic is computed here; its P-values come from the Monte-Carlo
/// pipeline, not Royston's transformation.
pub fn shapiro_wilk(x: &Sample) -> Result<f64> {
    let n = x.n();
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    if n > 5000 {
        return Err(Error::InvalidConfig(alloc::format!(
            "Shapiro-Wilk supports n <= 5000, got {n}"
        )));
    }
    let mut sorted = x.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = math::mean(&sorted);
    let mut ssq = 0.0;
    for &v in &sorted {
        ssq += (v - mean) * (v - mean);
    }
    if ssq == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let a = shapiro_wilk_coefficients(n);
    let mut num = 0.0;
    for i in 0..n {
        num += a[i] * sorted[i];
    }
    Ok((num * num / ssq).clamp(0.0, 1.0))
}

/// AS R94 weight vector for the Shapiro-Wilk statistic.
pub fn shapiro_wilk_coefficients(n: usize) -> Vec<f64> {
    if n == 3 {
        let r = libm::sqrt(0.5);
        return vec![-r, 0.0, r];
    }
    let nf = n as f64;
    let mut m = vec![0.0; n];
    for (i, mi) in m.iter_mut().enumerate() {
        *mi = math::normal_quantile((i as f64 + 1.0 - 0.375) / (nf + 0.25));
    }
    let mut ssq_m = 0.0;
    for &v in &m {
        ssq_m += v * v;
    }
    let rsn = 1.0 / libm::sqrt(nf);
    let poly = |c: &[f64]| {
        // c[0] + c[1] rsn + ... evaluated by Horner from the high end.
        let mut acc = 0.0;
        for &ci in c.iter().rev() {
            acc = acc * rsn + ci;
        }
        acc
    };
    let norm_m = libm::sqrt(ssq_m);
    let a_n = poly(&[0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056]) + m[n - 1] / norm_m;
    let mut a = vec![0.0; n];
    a[n - 1] = a_n;
    a[0] = -a_n;
    let phi;
    let fixed;
    if n > 5 {
        let a_n1 =
            poly(&[0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633]) + m[n - 2] / norm_m;
        a[n - 2] = a_n1;
        a[1] = -a_n1;
        phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2])
            / (1.0 - 2.0 * a_n * a_n - 2.0 * a_n1 * a_n1);
        fixed = 2;
    } else {
        phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * a_n * a_n);
        fixed = 1;
    }
    let s = libm::sqrt(phi);
    for i in fixed..(n - fixed) {
        a[i] = m[i] / s;
    }
    a
}
