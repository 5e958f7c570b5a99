//! Deterministic counter-based random streams.
//!
//! Every random quantity in a scenario is addressed by `(seed, stream, draw)`
//! and computed as a pure hash of that address, so consumers can be added or
//! reordered without shifting anyone else's values. This is what makes two
//! methods run against the same seed see byte-identical user populations.

/// splitmix64 finalizer; a well-mixed 64-bit permutation.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64 uncorrelated bits for the address `(seed, stream, draw)`.
pub fn bits(seed: u64, stream: u64, draw: u64) -> u64 {
    let a = splitmix64(seed);
    let b = splitmix64(a ^ stream.wrapping_mul(0xa076_1d64_78bd_642f));
    splitmix64(b ^ draw.wrapping_mul(0xe703_7ed1_a0b4_28db))
}

/// Uniform draw in [0, 1) for the address `(seed, stream, draw)`.
pub fn uniform(seed: u64, stream: u64, draw: u64) -> f64 {
    // 53 high-quality bits -> [0,1) with full double precision.
    (bits(seed, stream, draw) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in [lo, hi).
pub fn uniform_in(seed: u64, stream: u64, draw: u64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform(seed, stream, draw)
}
