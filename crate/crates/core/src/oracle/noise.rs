/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform value in `[-1, 1)` that depends only on the key, so results do
/// not depend on traversal order.
pub fn symmetric_unit(seed: u64, channel: u64, x: u64, y: u64) -> f64 {
    let h = mix(mix(mix(mix(seed) ^ channel) ^ x) ^ y);
    // 53 high bits -> [0, 1).
    let u = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}
