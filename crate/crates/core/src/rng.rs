//! Deterministic random streams keyed by `(seed, label, index)`.
//!
//! Every consumer of randomness asks for its own labeled stream, so adding a
//! component or a trial never shifts the draws of another one.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

// FNV-1a, 64 bit.
fn fnv1a(bytes: &[u8], mut hash: u64) -> u64 {
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Stream identifier for a label and index.
pub fn stream_id(label: &str, index: u64) -> u64 {
    let h = fnv1a(label.as_bytes(), 0xcbf2_9ce4_8422_2325);
    fnv1a(&index.to_le_bytes(), h)
}

/// Generator for the labeled substream `(label, index)` of `seed`.
pub fn stream(seed: u64, label: &str, index: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(label, index));
    rng
}

/// Derives a child seed, used when a sub-task owns a whole family of streams.
pub fn child_seed(seed: u64, label: &str, index: u64) -> u64 {
    stream_id(label, index) ^ seed.rotate_left(17) ^ 0x9e37_79b9_7f4a_7c15
}
