use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

/// Seedable generator with a fixed, documented algorithm so other
/// implementations can reproduce the same draws.
///
/// * integers: SplitMix64 (Steele, Lea & Flood), seeded with the raw 64-bit seed;
/// * uniforms: `(next_u64 >> 11) * 2^-53`, in `[0, 1)`;
/// * normals: one Box–Muller cosine branch per pair of uniforms,
///   `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`.
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: SplitMix64,
}

/// Per-purpose stream keys, XORed into the scenario seed.
pub(crate) const FIELD_STREAM: u64 = 0;
pub(crate) const SURVEY_STREAM: u64 = 0x5355_5256_4559_0001;
pub(crate) const LAYOUT_STREAM: u64 = 0x4c41_594f_5554_0002;

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self { inner: SplitMix64::from_seed(seed.to_le_bytes()) }
    }

    pub(crate) fn stream(seed: u64, key: u64) -> Self {
        Self::new(seed ^ key)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
