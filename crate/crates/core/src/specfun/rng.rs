//! Reproducible random streams and Poisson sampling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};

/// Largest rate accepted by the multiplication sampler.
pub const MAX_POISSON_RATE: f64 = 30.0;

/// A ChaCha8 stream identified by `(seed, stream)`.
///
/// The generator is counter based, so the sequence for a given pair is the
/// same on every platform, and distinct stream ids give non-overlapping
/// streams under the same key.
#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Fresh generator on the same seed with a different stream id.
    pub fn substream(&self, stream: u64) -> Self {
        Self::new(self.seed, stream)
    }

    /// Uniform draw on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Poisson sampler by inversion through products of uniforms.
///
/// Draws `k` such that `U_1 ⋯ U_{k+1} ≤ e^{-λ} < U_1 ⋯ U_k`, which is an
/// exact Poisson(λ) variate, at an expected cost of `λ + 1` uniforms.
#[derive(Clone, Copy, Debug)]
pub struct PoissonSampler {
    rate: f64,
    threshold: f64,
}

impl PoissonSampler {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || rate > MAX_POISSON_RATE {
            return Err(domain(
                "poisson_sample",
                format!("rate must lie in (0, {MAX_POISSON_RATE}], got {rate}"),
            ));
        }
        Ok(Self {
            rate,
            threshold: (-rate).exp(),
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    #[inline]
    pub fn sample(&self, rng: &mut RngState) -> u32 {
        let mut k = 0u32;
        let mut product = rng.uniform();
        while product > self.threshold {
            k += 1;
            product *= rng.uniform();
        }
        k
    }
}

/// One Poisson(`rate`) draw.
pub fn poisson_sample(rng: &mut RngState, rate: f64) -> Result<u32> {
    Ok(PoissonSampler::new(rate)?.sample(rng))
}
