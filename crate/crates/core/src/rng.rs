//! Seeded random streams. Every consumer derives its own stream from the
//! run seed so that results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RandomStream = ChaCha8Rng;

/// Stream `index` of the generator seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mixes a label into a seed, so sibling modules get unrelated streams.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, folded into the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Draws an index with probability proportional to `weights`. `None` when
/// no weight is positive.
pub fn weighted_index<R: rand::Rng>(weights: &[f64], rng: &mut R) -> Option<usize> {
    use rand::distributions::{Distribution, WeightedIndex};
    WeightedIndex::new(weights).ok().map(|d| d.sample(rng))
}
