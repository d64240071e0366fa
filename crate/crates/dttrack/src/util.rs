//! Seed derivation and content digests shared across the crate.

/// FNV-1a 64-bit digest.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// FNV-1a digest rendered as a fixed-width hex string.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a(bytes))
}

/// Digest of a parameter array through its 32-bit little-endian encoding,
/// the same bytes a checkpoint blob stores.
pub fn digest_f32_le(values: impl Iterator<Item = f64>) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for v in values {
        for b in (v as f32).to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Derives an independent stream seed from a base seed and a path of labels.
///
/// Every random decision in the crate (init, batch draw, mask draw, per-sequence
/// generation) gets its own stream via a distinct path, so consuming one stream
/// never perturbs another. SplitMix64 finalization keeps the outputs well mixed.
pub fn split_seed(base: u64, path: &[u64]) -> u64 {
    let mut z = base ^ 0x9e37_79b9_7f4a_7c15;
    for &p in path {
        z = z.wrapping_add(p.wrapping_mul(0xbf58_476d_1ce4_e5b9));
        z = splitmix(z);
    }
    splitmix(z)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream labels for [`split_seed`] paths.
pub mod stream {
    pub const INIT: u64 = 1;
    pub const BATCH: u64 = 2;
    pub const MASK: u64 = 3;
    pub const SEQUENCE: u64 = 4;
    pub const EVAL: u64 = 5;
    pub const STAGE: u64 = 6;
    pub const SWEEP: u64 = 7;
}
