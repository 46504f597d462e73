//! Seed and stream derivation.
//!
//! Every random quantity is addressed by (master seed, stream, position) on a
//! ChaCha8 keystream, so results do not depend on iteration order or on how
//! work is split across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::normal::std_normal_quantile;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate `rep` under a master seed.
pub fn replicate_seed(master: u64, rep: u64) -> u64 {
    mix64(master ^ mix64(rep.wrapping_add(0x5EED)))
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Open-interval uniform from the top 53 bits.
#[inline]
fn unit_open(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Fills `out` with N(0,1) draws for positions `start..start + out.len()` of
/// the given stream. Position `j` always consumes keystream words `2j, 2j+1`,
/// so any sub-range reproduces the same values as a full pass.
pub fn counter_normals(seed: u64, stream: u64, start: u64, out: &mut [f64]) {
    let mut rng = stream_rng(seed, stream);
    rng.set_word_pos(2 * start as u128);
    for v in out.iter_mut() {
        // unit_open never returns 0 or 1
        *v = std_normal_quantile(unit_open(rng.next_u64())).expect("open unit interval");
    }
}
