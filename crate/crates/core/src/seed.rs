//! Seed derivation for reproducible Monte Carlo runs.
//!
//! Every random stream is a `ChaCha8Rng` seeded from a 64-bit value derived
//! with SplitMix64 finalization steps. The mixing uses only wrapping integer
//! arithmetic, so derived seeds are identical on every platform.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const REP_SALT: u64 = 0xD1B5_4A32_D192_ED03;
const RUN_SALT: u64 = 0x8CB9_2BA7_2F3D_8DD7;
const STREAM_SALT: u64 = 0xA076_1D64_78BD_642F;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run_index` within repetition `rep_index`.
///
/// Computed as `h(h(h(master) ^ rep * R1) ^ run * R2)` with `h` the SplitMix64
/// finalizer and `R1 != R2` odd constants. Each step is a bijection of the
/// running state, so for a fixed master and repetition distinct runs never
/// collide, and swapping `rep` and `run` gives a different seed.
pub fn derive_run_seed(master_seed: u64, rep_index: u64, run_index: u64) -> u64 {
    let h = splitmix64(master_seed);
    let h = splitmix64(h ^ rep_index.wrapping_mul(REP_SALT));
    splitmix64(h ^ run_index.wrapping_mul(RUN_SALT))
}

/// Independent master seed for a labelled sub-experiment.
pub fn stream_seed(master_seed: u64, label: u64) -> u64 {
    splitmix64(splitmix64(master_seed ^ STREAM_SALT) ^ label.wrapping_mul(GOLDEN))
}
