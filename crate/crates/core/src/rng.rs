//! Reproducible random numbers.
//!
//! The generator and every derived variate are fixed, documented algorithms,
//! so that seeded results are bit-identical across platforms and releases:
//!
//! - Generator: SplitMix64 (Vigna's reference constants). State advances by
//!   the golden-ratio increment; output is the Stafford mix13 finalizer.
//! - Substreams: chunk `i` of a run with seed `s` starts from
//!   `s ^ mix13(golden * (i + 1))`. Distinct chunks land at effectively
//!   random offsets of the period-2^64 master sequence, so overlaps are
//!   vanishingly unlikely at Monte-Carlo scales, and chunk outputs do not
//!   depend on which worker produced them.
//! - Uniforms: 53-bit mantissa from the top bits of one `u64`.
//! - Normals: Box-Muller in trigonometric form, two uniforms per pair.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix13(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Stream for chunk `chunk` of a run seeded with `seed`.
    pub fn substream(seed: u64, chunk: u64) -> Self {
        SplitMix64 {
            state: seed ^ mix13(GOLDEN.wrapping_mul(chunk.wrapping_add(1))),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix13(self.state)
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// One standard-normal pair via Box-Muller:
    /// `r = sqrt(-2 ln u1)`, `z = (r cos(2 pi u2), r sin(2 pi u2))`
    /// with `u1` in (0, 1] so the log is finite.
    #[inline]
    pub fn next_normal_pair(&mut self) -> (f64, f64) {
        let u1 = ((self.next_u64() >> 11) as f64 + 1.0) * (1.0 / 9_007_199_254_740_992.0);
        let u2 = (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        (r * libm::cos(theta), r * libm::sin(theta))
    }

    /// One standard normal (second half of the pair is discarded).
    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        self.next_normal_pair().0
    }

    /// Fill `out` with standard normals, consuming `ceil(len/2)` pairs; the
    /// spare half of the final pair is discarded when `len` is odd.
    pub fn fill_normals(&mut self, out: &mut [f64]) {
        let mut i = 0;
        while i + 1 < out.len() {
            let (a, b) = self.next_normal_pair();
            out[i] = a;
            out[i + 1] = b;
            i += 2;
        }
        if i < out.len() {
            out[i] = self.next_normal_pair().0;
        }
    }
}
