//! Seed protocol.
//!
//! Every random draw in the crate comes from a ChaCha8 stream cipher keyed by
//! a 64-bit seed (`ChaCha8Rng::seed_from_u64`) with a 64-bit stream id
//! selected by `set_stream`. ChaCha is counter based, so the i-th output of
//! `(seed, stream)` is fixed and independent of how other streams are
//! consumed. Batch jobs give item `j` stream `j` (plus a per-purpose offset),
//! which keeps results reproducible under any scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream offsets used by the different consumers of a single user seed.
pub mod streams {
    pub const GRAPH: u64 = 0;
    pub const DIRAC: u64 = 1 << 32;
    pub const PARAM: u64 = 2 << 32;
    pub const SHUFFLE: u64 = 3 << 32;
    pub const INIT: u64 = 4 << 32;
    pub const FOLDS: u64 = 5 << 32;
    pub const SUITE: u64 = 6 << 32;
}

/// Deterministic generator for `(seed, stream)`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}
