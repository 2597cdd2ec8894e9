//! Seed derivation for the independent random streams of a run.
//!
//! Every consumer (publishing, bot loop, user activity, extended actions,
//! feed analyses) gets its own ChaCha stream so that enabling one feature
//! never perturbs the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named stream identifiers.
pub mod stream {
    pub const NETWORK: u64 = 1;
    pub const BOT: u64 = 2;
    pub const USER: u64 = 3;
    pub const EXTENDED: u64 = 4;
    pub const ANALYSIS: u64 = 5;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ index)
}

pub fn stream_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ() {
        let a = derive_seed(42, stream::BOT, 0);
        let b = derive_seed(42, stream::USER, 0);
        let c = derive_seed(42, stream::BOT, 1);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(42, stream::BOT, 0));
    }
}
