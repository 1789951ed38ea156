//! Seed-addressed random streams.
//!
//! Every consumer of randomness derives its generator from `(seed, stream, index)`,
//! so a draw depends only on its address and never on how many draws other
//! consumers made before it. This is what lets extraction candidates and
//! synthetic rows be generated in any order or in parallel with identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent sub-streams of one run seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Synthesize = 1,
    Split = 2,
    Train = 3,
    Extract = 4,
    Benchmark = 5,
    Test = 6,
}

/// Generator for the `index`-th draw of `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(stream as u64).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    key[24..32].copy_from_slice(b"heckfa01");
    ChaCha8Rng::from_seed(key)
}

/// Derives a child seed, e.g. one per benchmark repetition.
pub fn derive_seed(seed: u64, stream: Stream, index: u64) -> u64 {
    use rand::RngCore;
    stream_rng(seed, stream, index).next_u64()
}
