//! Seedable random streams and the samplers used by the mechanisms.

mod matrices;
mod scalar;

pub use matrices::{
    sample_symmetric_gaussian_matrix, sample_symmetric_laplace_matrix, sample_wishart,
    wishart_log_density, WishartParams, WishartScale,
};
pub use scalar::{sample_gamma, sample_gaussian, sample_laplace, Laplace};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha12, whose 64-bit stream selector gives each `stream_id`
/// its own non-overlapping keystream under the same seed.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream for trial `index`. Children of one parent differ only in
    /// their stream id; the key is derived from the parent's `(seed, stream_id)`
    /// so children of different parents do not collide.
    pub fn substream(&self, index: u64) -> RngStream {
        let key = splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0xA5A5_A5A5)));
        RngStream::new(key, index)
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
