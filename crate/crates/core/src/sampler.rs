//! The standardized residual direction and its reproducible sampler.
//!
//! For a normal sample, `d(x) = (x - mean 1) / ||x - mean 1||` is uniform on
//! the unit sphere intersected with the hyperplane orthogonal to `1`, and is
//! independent of the minimal sufficient statistic `(mean, ||residual||)`.
//! Conditioning a discrepancy statistic on the sufficient statistic is
//! therefore the same as pushing it through draws of `d`, which this module
//! generates by standardizing spherical Gaussian vectors (no rejection step
//! is needed: standardizing is linear projection plus normalization, and the
//! projected Gaussian is rotationally symmetric in the hyperplane).

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::sample::{MonteCarloConfig, Sample};
use alloc::vec;
use alloc::vec::Vec;

/// A direction on the centered unit sphere: entries sum to 0 (within 1e-12)
/// and have Euclidean norm 1 (within 1e-12).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitResidual {
    d: Vec<f64>,
}

impl UnitResidual {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if d.len() < 3 {
            return Err(Error::TooFewObservations {
                needed: 3,
                got: d.len(),
            });
        }
        let mut sum = 0.0;
        let mut sq = 0.0;
        for &v in &d {
            sum += v;
            sq += v * v;
        }
        if libm::fabs(sum) > 1e-12 || libm::fabs(libm::sqrt(sq) - 1.0) > 1e-12 {
            return Err(Error::DegenerateSample);
        }
        Ok(UnitResidual { d })
    }

    pub fn coords(&self) -> &[f64] {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }
}

/// Center and normalize a sample to its residual direction.
///
/// Centering is applied twice so the residual sum is zero to roundoff even
/// for badly scaled data.
pub fn standardize(x: &Sample) -> Result<UnitResidual> {
    standardize_raw(x.values())
}

/// Slice form of [`standardize`], for composed-map evaluation at perturbed
/// ambient points.
pub fn standardize_raw(values: &[f64]) -> Result<UnitResidual> {
    let n = values.len();
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    let mut u = values.to_vec();
    center(&mut u);
    center(&mut u);
    let mut sq = 0.0;
    for &v in &u {
        sq += v * v;
    }
    let norm = libm::sqrt(sq);
    if norm == 0.0 {
        return Err(Error::DegenerateSample);
    }
    for v in &mut u {
        *v /= norm;
    }
    Ok(UnitResidual { d: u })
}

fn center(u: &mut [f64]) {
    let mut s = 0.0;
    for &v in u.iter() {
        s += v;
    }
    let m = s / u.len() as f64;
    for v in u.iter_mut() {
        *v -= m;
    }
}

/// Draw one chunk of residual directions from its dedicated substream.
///
/// A pure function of `(n, seed, chunk_index, count)`: output never depends
/// on which worker runs the chunk.
pub fn draw_chunk(n: usize, seed: u64, chunk_index: u64, count: usize) -> Vec<UnitResidual> {
    let mut rng = SplitMix64::substream(seed, chunk_index);
    let mut out = Vec::with_capacity(count);
    let mut z = vec![0.0; n];
    for _ in 0..count {
        // A zero residual vector has probability zero; redraw keeps the
        // stream deterministic if it ever happens.
        loop {
            rng.fill_normals(&mut z);
            if let Ok(d) = standardize_raw(&z) {
                out.push(d);
                break;
            }
        }
    }
    out
}

/// Draw `config.n_sim` residual directions of dimension `n`, chunked into
/// substreams of `config.chunk_size` and concatenated in chunk order.
pub fn draw_directions(n: usize, config: &MonteCarloConfig) -> Result<Vec<UnitResidual>> {
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    config.validate()?;
    let mut out = Vec::with_capacity(config.n_sim);
    let mut remaining = config.n_sim;
    let mut chunk_index = 0u64;
    while remaining > 0 {
        let count = remaining.min(config.chunk_size);
        out.extend(draw_chunk(n, config.seed, chunk_index, count));
        remaining -= count;
        chunk_index += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_sim: usize, seed: u64) -> MonteCarloConfig {
        MonteCarloConfig {
            n_sim,
            seed,
            chunk_size: 1000,
            ..MonteCarloConfig::default()
        }
    }

    #[test]
    fn standardize_hand_example() {
        let s = Sample::new(vec![1.0, 2.0, 3.0]).unwrap();
        let d = standardize(&s).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((d.coords()[0] + r).abs() < 1e-15);
        assert!(d.coords()[1].abs() < 1e-15);
        assert!((d.coords()[2] - r).abs() < 1e-15);
    }

    #[test]
    fn constant_sample_rejected() {
        let s = Sample::new(vec![5.0, 5.0, 5.0]).unwrap();
        assert_eq!(standardize(&s).unwrap_err(), Error::DegenerateSample);
    }

    #[test]
    fn affine_invariance_bitwise() {
        // Dyadic data, power-of-two scale, and n dividing the sums keep
        // every intermediate exact, so the directions agree bit for bit.
        let base = vec![1.5, -2.25, 0.75, 3.125, -0.5, 2.0, 1.25, -1.0];
        let x = Sample::new(base.clone()).unwrap();
        let y = Sample::new(base.iter().map(|v| 3.0 + 2.0 * v).collect()).unwrap();
        assert_eq!(
            standardize(&x).unwrap().coords(),
            standardize(&y).unwrap().coords()
        );
        let z = Sample::new(base.iter().map(|v| -1.25 + 0.5 * v).collect()).unwrap();
        assert_eq!(
            standardize(&x).unwrap().coords(),
            standardize(&z).unwrap().coords()
        );
    }

    #[test]
    fn draws_satisfy_invariants() {
        for d in draw_directions(5, &cfg(2000, 9)).unwrap() {
            let sum: f64 = d.coords().iter().sum();
            let sq: f64 = d.coords().iter().map(|v| v * v).sum();
            assert!(sum.abs() < 1e-12);
            assert!((sq - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coordinate_means_vanish() {
        let draws = draw_directions(3, &cfg(10_000, 4)).unwrap();
        let m = 10_000f64;
        for j in 0..3 {
            let mean: f64 = draws.iter().map(|d| d.coords()[j]).sum::<f64>() / m;
            // CLT band: coordinate variance is 1/n-ish, 4 sigma margin.
            assert!(mean.abs() < 4.0 / m.sqrt(), "coord {j} mean {mean}");
        }
    }

    #[test]
    fn chunk_layout_independent_of_worker_count() {
        // Sequential assembly.
        let seq = draw_directions(10, &cfg(5000, 77)).unwrap();
        // "8 workers": compute chunks out of order, then place by index.
        let chunk_size = 1000;
        let mut by_worker: Vec<Vec<UnitResidual>> = (0..5)
            .rev()
            .map(|i| draw_chunk(10, 77, i as u64, chunk_size))
            .collect();
        by_worker.reverse();
        let stitched: Vec<UnitResidual> = by_worker.into_iter().flatten().collect();
        assert_eq!(seq, stitched);
    }

    #[test]
    fn sign_symmetry_of_first_coordinate() {
        // Kolmogorov-Smirnov distance between d_1 and -d_1 draws.
        let draws = draw_directions(4, &cfg(100_000, 11)).unwrap();
        let mut a: Vec<f64> = draws.iter().map(|d| d.coords()[0]).collect();
        let mut b: Vec<f64> = a.iter().map(|v| -v).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let n = a.len();
        let mut ks = 0.0f64;
        let (mut i, mut j) = (0usize, 0usize);
        while i < n && j < n {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            ks = ks.max(((i as f64 - j as f64) / n as f64).abs());
        }
        assert!(ks < 0.02, "KS distance {ks}");
    }
}
