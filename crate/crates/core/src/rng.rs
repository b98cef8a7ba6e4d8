//! Named, seeded random streams.
//!
//! Every randomized stage draws from a ChaCha8 generator keyed by the master
//! seed and selected by a stream name, so adding a new stage never shifts the
//! numbers another stage sees. ChaCha8 output is platform independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Generator for stream `name` under master seed `seed`.
pub fn stream(seed: u64, name: &str) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(fnv1a(name));
    r
}

/// Derive a child seed, used to give each generated series its own seed.
pub fn child_seed(seed: u64, name: &str, index: u64) -> u64 {
    let mut h = fnv1a(name) ^ seed.rotate_left(17);
    h ^= index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    // splitmix64 finalizer
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, "gen").gen();
        let b: u64 = stream(7, "gen").gen();
        let c: u64 = stream(7, "train").gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(child_seed(1, "x", 0), child_seed(1, "x", 1));
    }
}
