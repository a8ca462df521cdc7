//! Deterministic seed derivation for independent pipeline stages.

/// Derive a child seed from a base seed and a salt path (splitmix64
/// finalizer per step). Stable across platforms and releases.
pub fn derive_seed(base: u64, salts: &[u64]) -> u64 {
    let mut z = base;
    for &s in salts {
        z ^= s.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x1234_5678_9ABC_DEF1);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}
