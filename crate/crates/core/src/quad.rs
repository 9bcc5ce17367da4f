//! Adaptive quadrature.
//!
//! Classic recursive adaptive Simpson with the Richardson `|S2 - S1|/15`
//! error control, plus helpers for integrands on unbounded intervals that
//! decay to zero (geometric tail expansion with an explicit truncation
//! criterion).

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 52;

#[inline]
fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    worst: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let err = left + right - whole;
    if libm::fabs(err) <= 15.0 * eps || depth >= MAX_DEPTH {
        if depth >= MAX_DEPTH {
            *worst = libm::fmax(*worst, libm::fabs(err) / 15.0);
        }
        return left + right + err / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, eps * 0.5, depth + 1, worst)
        + adapt(f, m, b, fm, frm, fb, right, eps * 0.5, depth + 1, worst)
}

/// Integrate `f` over `[a, b]` to the given relative tolerance.
///
/// The absolute budget is `rel_tol` times a first-pass estimate of the
/// integral's magnitude (floored to avoid a zero budget on tiny integrals).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    let scale = libm::fmax(libm::fabs(whole), 1e-300);
    let eps = rel_tol * scale;
    let mut worst = 0.0;
    let v = adapt(&f, a, b, fa, fm, fb, whole, eps, 0, &mut worst);
    if !v.is_finite() {
        return Err(Error::QuadratureFailure {
            achieved: f64::INFINITY,
            requested: rel_tol,
        });
    }
    if worst > eps * 16.0 {
        return Err(Error::QuadratureFailure {
            achieved: worst / scale,
            requested: rel_tol,
        });
    }
    Ok(v)
}

/// Integrate a decaying integrand over `[lo, +inf)`.
///
/// Starts from `[lo, lo + first_block]` and appends doubling blocks until a
/// block contributes less than `tail_tol` of the running total, so the
/// truncated tail is below `tail_tol` of the result for geometrically
/// decaying integrands.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    first_block: f64,
    rel_tol: f64,
    tail_tol: f64,
) -> Result<f64> {
    let mut total = 0.0;
    let mut a = lo;
    let mut w = first_block;
    for _ in 0..90 {
        let block = integrate(&f, a, a + w, rel_tol)?;
        total += block;
        a += w;
        w *= 2.0;
        if libm::fabs(block) <= tail_tol * libm::fmax(libm::fabs(total), 1e-300) && total != 0.0 {
            return Ok(total);
        }
    }
    Err(Error::QuadratureFailure {
        achieved: f64::NAN,
        requested: tail_tol,
    })
}

/// Integrate a decaying integrand over the whole real line, expanding
/// symmetrically from `[center - half_width, center + half_width]`.
pub fn integrate_real_line<F: Fn(f64) -> f64>(
    f: F,
    center: f64,
    half_width: f64,
    rel_tol: f64,
    tail_tol: f64,
) -> Result<f64> {
    let core = integrate(&f, center - half_width, center + half_width, rel_tol)?;
    let mut total = core;
    // Right tail.
    let mut a = center + half_width;
    let mut w = half_width;
    for _ in 0..90 {
        let block = integrate(&f, a, a + w, rel_tol)?;
        total += block;
        a += w;
        w *= 2.0;
        if libm::fabs(block) <= tail_tol * libm::fmax(libm::fabs(total), 1e-300) {
            break;
        }
    }
    // Left tail.
    let mut b = center - half_width;
    let mut w = half_width;
    for _ in 0..90 {
        let block = integrate(&f, b - w, b, rel_tol)?;
        total += block;
        b -= w;
        w *= 2.0;
        if libm::fabs(block) <= tail_tol * libm::fmax(libm::fabs(total), 1e-300) {
            break;
        }
    }
    Ok(total)
}
