//! Deterministic random streams.
//!
//! Every episode owns four independent ChaCha8 streams, each seeded by a
//! splittable hash of the episode seed. Keeping the streams separate means
//! one consumer (say, the admission gate) can draw more or fewer values
//! without shifting what any other consumer sees, so runs stay comparable
//! across policies and replications run on any number of workers.
//!
//! Seed derivation is a fixed, documented scheme:
//!
//! ```text
//! episode_seed(master, policy_index, replication) =
//!     mix64(mix64(master ^ GOLDEN) ^ policy_index * M1 ^ replication * M2)
//! stream_seed(episode_seed, tag) = mix64(episode_seed ^ tag)
//! ```
//!
//! where `mix64` is the SplitMix64 finalizer. Adding a policy or a
//! replication never perturbs the stream of any other (policy, replication)
//! pair.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used for every stochastic draw in the simulator.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const MULT_POLICY: u64 = 0xbf58_476d_1ce4_e5b9;
const MULT_REPLICATION: u64 = 0x94d0_49bb_1331_11eb;

const TAG_ENV: u64 = 0x7c15_98f1_5d3b_2e01;
const TAG_SAMPLING: u64 = 0x2b99_4e4d_60c4_a3f7;
const TAG_GATE: u64 = 0xd1b5_4a32_d192_ed03;
const TAG_INIT: u64 = 0x8cb9_2ba7_2f3d_8dd7;

/// SplitMix64 finalizer: a bijective 64-bit mixer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one (policy, replication) episode, split from the master seed.
pub fn episode_seed(master_seed: u64, policy_index: usize, replication: usize) -> u64 {
    let mut s = mix64(master_seed ^ GOLDEN);
    s = mix64(s ^ (policy_index as u64).wrapping_mul(MULT_POLICY));
    mix64(s ^ (replication as u64).wrapping_mul(MULT_REPLICATION))
}

/// Seed a standalone stream from a bare seed and a purpose tag.
pub fn tagged_rng(seed: u64, tag: u64) -> SimRng {
    SimRng::seed_from_u64(mix64(seed ^ tag))
}

/// The independent random streams owned by one episode.
#[derive(Debug, Clone)]
pub struct EpisodeStreams {
    /// Channel occupancy draws and the per-slot SNR draw.
    pub env: SimRng,
    /// Channel selection draws, one per transmitting agent per slot.
    pub sampling: SimRng,
    /// Admission-gate draws.
    pub gate: SimRng,
    /// One-time per-agent initialization draws (the admission step size).
    pub init: SimRng,
}

impl EpisodeStreams {
    /// Build the four streams for one episode seed.
    pub fn new(episode_seed: u64) -> Self {
        EpisodeStreams {
            env: tagged_rng(episode_seed, TAG_ENV),
            sampling: tagged_rng(episode_seed, TAG_SAMPLING),
            gate: tagged_rng(episode_seed, TAG_GATE),
            init: tagged_rng(episode_seed, TAG_INIT),
        }
    }
}
