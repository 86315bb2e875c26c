//! Deterministic random number generation for instance synthesis.
//!
//! The generator is SplitMix64 (Steele, Lea, Flood; public domain), a 64-bit
//! counter-based mixer. Standard normal variates are produced by the
//! Box-Muller transform applied to uniforms in (0, 1]. Both transforms are
//! fixed here so a seed determines every generated instance byte-for-byte
//! across runs and platforms.

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in (0, 1]: the high 53 bits shifted into the unit interval,
    /// offset by one ulp so `ln` never sees zero.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        (((self.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
    }

    /// Uniform integer in `[0, bound)` by modulo reduction. The bias is
    /// below 2^-32 for every bound used here (bounds are at most ~10^5).
    #[inline]
    pub fn next_below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }
}

/// Standard normal sampler: Box-Muller on top of [`SplitMix64`], caching the
/// second variate of each pair.
#[derive(Debug, Clone)]
pub struct NormalSource {
    rng: SplitMix64,
    spare: Option<f64>,
}

impl NormalSource {
    pub fn new(seed: u64) -> Self {
        NormalSource { rng: SplitMix64::new(seed), spare: None }
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.rng.next_unit();
        let u2 = self.rng.next_unit();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Discards any cached spare and exposes the underlying generator, for
    /// draws that must not interleave with normal sampling state.
    pub fn raw(&mut self) -> &mut SplitMix64 {
        self.spare = None;
        &mut self.rng
    }
}
