//! Counter-based seed derivation, so every replication gets the same noise
//! no matter how replications are scheduled across threads.

use super::signals::SignalSpec;

// splitmix64 finalizer
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn hash64(master: u64, experiment: u64, rep: u64) -> u64 {
    mix64(mix64(mix64(master) ^ experiment) ^ rep)
}

/// FNV-1a of a string.
pub fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

/// Identifies the noise stream of a series family and length. It does not
/// depend on the window length, so all windows see the same realizations.
pub fn experiment_id(spec: &SignalSpec) -> u64 {
    fnv1a(&format!("{}:{}", spec.kind.name(), spec.n))
}

pub fn rep_seed(master: u64, spec: &SignalSpec, rep: usize) -> u64 {
    hash64(master, experiment_id(spec), rep as u64)
}

/// Runs `f` on a rayon pool whose size comes from `SSA_LAB_THREADS`
/// (default: rayon's choice).
pub(crate) fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("SSA_LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
