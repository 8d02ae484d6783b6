//! Licensed channels and per-slot outcomes.
//!
//! A [`ChannelSet`] describes the licensed spectrum: `M` slotted channels,
//! each free in a slot with its own fixed probability, each carrying a fixed
//! payload when a single secondary user transmits on it unopposed. Each slot
//! the environment draws a [`ChannelRealization`] (which channels the primary
//! users left free) and, given the channels the secondary users picked,
//! [`classify_outcomes`] tags every channel with what happened there.
//!
//! Outcome semantics: a transmission succeeds on a channel if and only if the
//! channel is free and exactly one user chose it. Two or more choosers on a
//! free channel collide and deliver nothing. Any attempt on an occupied
//! channel defers to the primary user and delivers nothing.

use std::fmt;

use rand::Rng;

use crate::scalar::{cast, Real};

/// Errors raised when building a [`ChannelSet`] from untrusted values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnvError {
    NoChannels,
    ProbabilityOutOfRange { channel: usize },
    ZeroPayload,
    NonPositiveBandwidth,
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::NoChannels => write!(f, "channel set must contain at least one channel"),
            EnvError::ProbabilityOutOfRange { channel } => {
                write!(f, "free probability of channel {channel} is outside [0, 1]")
            }
            EnvError::ZeroPayload => write!(f, "per-slot payload must be at least 1 bit"),
            EnvError::NonPositiveBandwidth => write!(f, "channel bandwidth must be positive"),
        }
    }
}

impl std::error::Error for EnvError {}

/// The licensed spectrum: channel count, per-channel free probabilities and
/// the payload one successful slot delivers.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T: Real> {
    free_prob: Vec<T>,
    payload_bits: u64,
    bandwidth_hz: T,
}

impl<T: Real> ChannelSet<T> {
    /// Validate and build a channel set. `free_prob[m]` is the probability
    /// that channel `m` is free (unused by its primary user) in a slot.
    pub fn new(free_prob: Vec<T>, payload_bits: u64, bandwidth_hz: T) -> Result<Self, EnvError> {
        if free_prob.is_empty() {
            return Err(EnvError::NoChannels);
        }
        for (m, &p) in free_prob.iter().enumerate() {
            if !(p >= T::zero() && p <= T::one()) {
                return Err(EnvError::ProbabilityOutOfRange { channel: m });
            }
        }
        if payload_bits == 0 {
            return Err(EnvError::ZeroPayload);
        }
        // Negated form so that NaN fails validation too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(bandwidth_hz > T::zero()) {
            return Err(EnvError::NonPositiveBandwidth);
        }
        Ok(ChannelSet {
            free_prob,
            payload_bits,
            bandwidth_hz,
        })
    }

    /// Build a channel set whose free probabilities are drawn once, uniformly
    /// from `[lo, hi]`, from their own seeded stream.
    pub fn seeded_spread(
        num_channels: usize,
        lo: T,
        hi: T,
        payload_bits: u64,
        bandwidth_hz: T,
        seed: u64,
    ) -> Result<Self, EnvError> {
        const TAG_THETA: u64 = 0x3c6e_f372_fe94_f82b;
        if !(lo >= T::zero() && hi <= T::one() && lo <= hi) {
            return Err(EnvError::ProbabilityOutOfRange { channel: 0 });
        }
        let mut rng = crate::rng::tagged_rng(seed, TAG_THETA);
        let span = hi - lo;
        let free_prob = (0..num_channels)
            .map(|_| lo + span * cast::<T>(rng.random::<f64>()))
            .collect();
        Self::new(free_prob, payload_bits, bandwidth_hz)
    }

    /// Number of channels `M`.
    pub fn num_channels(&self) -> usize {
        self.free_prob.len()
    }

    /// Probability that channel `m` is free in a slot.
    pub fn free_prob(&self, m: usize) -> T {
        self.free_prob[m]
    }

    /// All per-channel free probabilities.
    pub fn free_probs(&self) -> &[T] {
        &self.free_prob
    }

    /// Bits delivered by one successful slot.
    pub fn payload_bits(&self) -> u64 {
        self.payload_bits
    }

    /// Per-channel bandwidth in Hz. Descriptive only; nothing downstream
    /// consumes it.
    pub fn bandwidth_hz(&self) -> T {
        self.bandwidth_hz
    }
}

/// Which channels the primary users left free in one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelRealization {
    pub slot_index: usize,
    pub free_flags: Vec<bool>,
}

/// What happened on one channel in one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelOutcome {
    /// The primary user held the channel; any choosers wait.
    PrimaryBusy,
    /// Free and unchosen.
    Idle,
    /// Free with exactly one chooser: the payload is delivered to this user.
    Success(usize),
    /// Free with two or more choosers: everyone's transmission is lost.
    Collision(Vec<usize>),
}

/// Per-channel outcome tags plus the chooser set of every channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotOutcome {
    /// Outcome tag per channel.
    pub channels: Vec<ChannelOutcome>,
    /// `choosers[m]`: ids of the users that transmitted on channel `m`,
    /// in ascending order.
    pub choosers: Vec<Vec<usize>>,
}

impl SlotOutcome {
    /// Outcome experienced by `user` given it transmitted on `channel`.
    pub fn outcome_for(&self, channel: usize) -> &ChannelOutcome {
        &self.channels[channel]
    }
}

/// Draw one slot's occupancy: channel `m` comes up free with probability
/// `free_prob[m]`, independently across channels and slots.
pub fn draw_realization<T: Real, R: Rng + ?Sized>(
    channels: &ChannelSet<T>,
    slot_index: usize,
    rng: &mut R,
) -> ChannelRealization {
    let free_flags = channels
        .free_probs()
        .iter()
        .map(|&theta| cast::<T>(rng.random::<f64>()) < theta)
        .collect();
    ChannelRealization {
        slot_index,
        free_flags,
    }
}

/// Tag every channel with its outcome given who chose it.
///
/// `choices` pairs each transmitting user id with the channel it picked.
/// Panics if a chosen channel index is out of range or a user id appears
/// twice; both are programming faults, not simulation events.
pub fn classify_outcomes(realization: &ChannelRealization, choices: &[(usize, usize)]) -> SlotOutcome {
    let m = realization.free_flags.len();
    let mut choosers: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &(user, channel) in choices {
        assert!(
            channel < m,
            "user {user} chose channel {channel}, but only {m} channels exist"
        );
        choosers[channel].push(user);
    }
    for set in &mut choosers {
        set.sort_unstable();
        debug_assert!(set.windows(2).all(|w| w[0] != w[1]), "duplicate user id");
    }
    let channels = realization
        .free_flags
        .iter()
        .zip(&choosers)
        .map(|(&free, set)| match (free, set.len()) {
            (false, _) => ChannelOutcome::PrimaryBusy,
            (true, 0) => ChannelOutcome::Idle,
            (true, 1) => ChannelOutcome::Success(set[0]),
            (true, _) => ChannelOutcome::Collision(set.clone()),
        })
        .collect();
    SlotOutcome { channels, choosers }
}
