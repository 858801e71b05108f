//! Counter-addressable random streams.
//!
//! Every unit of Monte Carlo work (a proposal, a dataset replication, a
//! minibatch subset) draws from `substream(seed, index)`. Streams with
//! distinct indices are statistically independent, and the same
//! `(seed, index)` pair always reproduces the same draws, so results do not
//! depend on worker count or execution order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One independent random stream, addressed by `(master_seed, index)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    index: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// Open the stream with the given index under a master seed.
pub fn substream(master_seed: u64, index: u64) -> RngStream {
    let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
    // ChaCha keys the stream by its 64-bit nonce; distinct nonces under one
    // key are independent by construction.
    inner.set_stream(index);
    RngStream {
        master_seed,
        index,
        inner,
    }
}

/// Derive a fresh master seed for a nested stage (e.g. "the proposals of
/// dataset j"), so nested stages never share substream indices.
pub fn derive_seed(master_seed: u64, tag: u64) -> u64 {
    // SplitMix64 finalizer over a golden-ratio tagged input.
    let mut z = master_seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
