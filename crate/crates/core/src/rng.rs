//! Seed derivation.
//!
//! Every random decision in the toolkit draws from a [`ChaCha8Rng`] seeded by
//! [`derive_seed`], a fixed FNV-1a/SplitMix64 construction over a master seed
//! and a list of labels. The construction does not depend on any library's
//! hashing internals, so seeds stay stable across versions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// One component of a derived seed.
#[derive(Debug, Clone, Copy)]
pub enum SeedPart<'a> {
    Str(&'a str),
    Int(u64),
}

impl<'a> From<&'a str> for SeedPart<'a> {
    fn from(s: &'a str) -> Self {
        SeedPart::Str(s)
    }
}

impl From<u64> for SeedPart<'_> {
    fn from(v: u64) -> Self {
        SeedPart::Int(v)
    }
}

impl From<usize> for SeedPart<'_> {
    fn from(v: usize) -> Self {
        SeedPart::Int(v as u64)
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv_feed(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and an ordered list of parts.
pub fn derive_seed(master: u64, parts: &[SeedPart<'_>]) -> u64 {
    let mut h = fnv_feed(FNV_OFFSET, &master.to_le_bytes());
    for part in parts {
        // Tag bytes keep ("ab", "c") and ("a", "bc") apart.
        match part {
            SeedPart::Str(s) => {
                h = fnv_feed(h, &[0x53]);
                h = fnv_feed(h, &(s.len() as u64).to_le_bytes());
                h = fnv_feed(h, s.as_bytes());
            }
            SeedPart::Int(v) => {
                h = fnv_feed(h, &[0x49]);
                h = fnv_feed(h, &v.to_le_bytes());
            }
        }
    }
    splitmix64(h)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
