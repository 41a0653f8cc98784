//! Per-sample random streams.
//!
//! Every sample owns an independent ChaCha8 stream whose key is derived
//! from `(master_seed, sample_index)` with splitmix64 mixing. Draws for a
//! sample therefore never depend on how many workers run or in which order
//! samples are produced.

use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// The splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `(master_seed, sample_index)` into a 64-bit stream seed.
pub fn stream_seed(master_seed: u64, sample_index: u64) -> u64 {
    let base = splitmix64(master_seed.wrapping_add(GOLDEN_GAMMA));
    splitmix64(base ^ splitmix64(sample_index.wrapping_mul(GOLDEN_GAMMA).wrapping_add(1)))
}

/// Which quantity a stream feeds. Each purpose uses its own ChaCha stream id
/// under the same per-sample key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    FieldCoefficients,
    CoefficientMatrix,
}

impl StreamPurpose {
    fn stream_id(self) -> u64 {
        match self {
            StreamPurpose::FieldCoefficients => 0,
            StreamPurpose::CoefficientMatrix => 1,
        }
    }
}

/// Counter-based generator for one sample, with Box–Muller normals.
#[derive(Debug, Clone)]
pub struct SampleRng {
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl SampleRng {
    pub fn for_sample(master_seed: u64, sample_index: u64, purpose: StreamPurpose) -> Self {
        let seed = stream_seed(master_seed, sample_index);
        let mut key = [0u8; 32];
        for (w, chunk) in key.chunks_exact_mut(8).enumerate() {
            let word = splitmix64(seed.wrapping_add((w as u64 + 1).wrapping_mul(GOLDEN_GAMMA)));
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(purpose.stream_id());
        Self {
            inner,
            spare_normal: None,
        }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }

    /// Uniform integer on the inclusive range.
    pub fn uniform_int(&mut self, lo: u32, hi: u32) -> u32 {
        self.inner.random_range(lo..=hi)
    }

    /// Standard normal via the Box–Muller transform; both variates of each
    /// pair are used.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping ln finite.
        let u1 = 1.0 - self.next_unit();
        let u2 = self.next_unit();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }
}
