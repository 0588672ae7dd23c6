//! Seed derivation.
//!
//! Every random draw in the workbench comes from a ChaCha8 stream keyed by
//! `(master_seed, label, index)`. Trials therefore see identical randomness
//! whether they run serially or on a thread pool, and the noise applied in a
//! trial can be replayed independently of the instance that produced it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type WorkbenchRng = ChaCha8Rng;

/// Stream labels. Distinct labels never share a stream for the same master
/// seed and index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Instance = 0x1b87_3593,
    Noise = 0x2c1b_3c6d,
    Polynomial = 0x4cf5_ad43,
    Permutation = 0x6b43_a9b5,
    Oracle = 0x8d2a_4c8a,
    Spec = 0xa54f_f53a,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed, a stream label and an index into one 64-bit seed.
pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    let a = splitmix64(master ^ (stream as u64).rotate_left(32));
    splitmix64(a ^ splitmix64(index.wrapping_add(stream as u64)))
}

/// A generator seeded directly from a 64-bit value.
pub fn from_seed(seed: u64) -> WorkbenchRng {
    let mut key = [0u8; 32];
    let mut s = seed;
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// The generator for `(master, stream, index)`.
pub fn stream(master: u64, stream: Stream, index: u64) -> WorkbenchRng {
    from_seed(derive_seed(master, stream, index))
}
