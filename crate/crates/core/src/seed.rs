//! Deterministic seed derivation.
//!
//! A master seed fans out to per-stage and per-item seeds by folding each
//! component through SplitMix64. Stage names are hashed with FNV-1a so the
//! derivation is stable across platforms and releases.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 output step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Folds `parts` into `base`. Order matters.
pub fn derive(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Seed for a named pipeline stage: `derive(master, [fnv1a(stage)])`.
pub fn stage_seed(master: u64, stage: &str) -> u64 {
    derive(master, &[fnv1a(stage.as_bytes())])
}
