//! Named sub-streams of a single per-run seed, so map generation, policy
//! exploration and waypoint sampling can be re-seeded independently.

/// Derives a deterministic sub-seed for a named stream (FNV-1a over the
/// domain name, mixed with the parent seed).
pub fn sub_seed(seed: u64, domain: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for byte in domain.bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
