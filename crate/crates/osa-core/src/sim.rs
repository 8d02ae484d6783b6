//! The slot engine: gating, channel selection, outcome resolution, learning
//! updates and metric accounting.
//!
//! One episode advances a fixed population of secondary users through
//! `num_slots` slots under a single policy. Within a slot the order is fixed:
//! the environment draws occupancy and the slot SNR, gated agents decide
//! whether to attempt transmission, transmitting agents sample channels,
//! outcomes are classified, bits are credited and the learning updates run,
//! and finally the admission gates adjust. Each stage consumes its own
//! dedicated random stream (see [`crate::rng::EpisodeStreams`]), so policies
//! that skip a stage still replay the same environment and the same channel
//! draws slot for slot.
//!
//! # Example
//! ```
//! use osa_core::env::ChannelSet;
//! use osa_core::policy::PolicyKind;
//! use osa_core::sim::{run_episode, SimConfig};
//!
//! let config = SimConfig {
//!     channels: ChannelSet::new(vec![1.0], 100, 1.0).unwrap(),
//!     num_users: 1,
//!     num_slots: 50,
//!     policy: PolicyKind::ClassicUniform,
//!     switch_cost: 1.0,
//!     snr_db_range: (0.0, 9.0),
//!     energy_per_bit: 1.0,
//!     seed: 7,
//!     legacy_initial_throughput: 3.0,
//! };
//! let result = run_episode(&config);
//! assert_eq!(result.metrics.total_bits, 50 * 100);
//! ```

use std::fmt;

use crate::env::{self, ChannelOutcome, ChannelSet, SlotOutcome};
use crate::link;
use crate::policy::{AdmissionState, PolicyKind, ProbabilityVector};
use crate::rng::EpisodeStreams;
use crate::scalar::{cast, Real};
use rand::Rng;

/// Errors raised when validating a [`SimConfig`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    NoUsers,
    NoSlots,
    SnrRangeInverted,
    NonPositiveEnergy,
    NegativeSwitchCost,
    ActionCountMismatch { expected: usize, actual: usize },
    TooFewChannelsForPolicy,
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::NoUsers => write!(f, "at least one secondary user is required"),
            SimError::NoSlots => write!(f, "at least one slot is required"),
            SimError::SnrRangeInverted => {
                write!(f, "SNR range lower bound must not exceed the upper bound")
            }
            SimError::NonPositiveEnergy => write!(f, "energy per bit must be positive"),
            SimError::NegativeSwitchCost => write!(f, "switch cost must be non-negative"),
            SimError::ActionCountMismatch { expected, actual } => write!(
                f,
                "policy is parameterized for {actual} actions but there are {expected} channels"
            ),
            SimError::TooFewChannelsForPolicy => {
                write!(f, "penalty-capable policies need at least 2 channels")
            }
        }
    }
}

impl std::error::Error for SimError {}

/// Everything one episode needs: the channel model, the population, the
/// policy, the link parameters and the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T: Real> {
    pub channels: ChannelSet<T>,
    pub num_users: usize,
    pub num_slots: usize,
    pub policy: PolicyKind<T>,
    /// Cost charged per channel switch when scoring an episode.
    pub switch_cost: T,
    /// Per-slot SNR is drawn uniformly from this closed range, in dB.
    pub snr_db_range: (T, T),
    /// Folded into the SNR as `10*log10(energy)` dB; a pass-through at 1 J.
    pub energy_per_bit: T,
    pub seed: u64,
    /// Carried for config compatibility; nothing reads it.
    pub legacy_initial_throughput: T,
}

impl<T: Real> SimConfig<T> {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.num_users == 0 {
            return Err(SimError::NoUsers);
        }
        if self.num_slots == 0 {
            return Err(SimError::NoSlots);
        }
        // Negated forms so that NaN fails validation too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.snr_db_range.0 <= self.snr_db_range.1) {
            return Err(SimError::SnrRangeInverted);
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.energy_per_bit > T::zero()) {
            return Err(SimError::NonPositiveEnergy);
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.switch_cost >= T::zero()) {
            return Err(SimError::NegativeSwitchCost);
        }
        let m = self.channels.num_channels();
        match &self.policy {
            PolicyKind::ClassicUniform => {}
            PolicyKind::RewardOnly(p) | PolicyKind::RewardPenalty(p) => {
                if p.num_actions != m {
                    return Err(SimError::ActionCountMismatch {
                        expected: m,
                        actual: p.num_actions,
                    });
                }
            }
            PolicyKind::QModel(_) => {
                if m < 2 {
                    return Err(SimError::TooFewChannelsForPolicy);
                }
            }
        }
        Ok(())
    }
}

/// One secondary user: its selection distribution, its admission gate and its
/// running counters.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState<T: Real> {
    pub user_id: usize,
    pub prob_vector: ProbabilityVector<T>,
    pub admission: AdmissionState<T>,
    pub last_channel: Option<usize>,
    pub bits_delivered: u64,
    pub collisions: u64,
    pub blocked: u64,
    pub switches: u64,
}

impl<T: Real> AgentState<T> {
    /// Record this slot's channel choice, counting a switch when it differs
    /// from the previous one. Blocked slots never reach this point, so a
    /// user that sits out keeps its last channel.
    pub fn note_choice(&mut self, channel: usize) {
        if let Some(prev) = self.last_channel {
            if prev != channel {
                self.switches += 1;
            }
        }
        self.last_channel = Some(channel);
    }
}

/// Build the agent population: uniform selection vectors and a fresh gate per
/// user, with each user's gate step drawn once from (0,1).
///
/// The step is drawn for every user regardless of policy so that the init
/// stream advances identically across policies sharing a seed.
pub fn init_agents<T: Real, R: Rng + ?Sized>(
    config: &SimConfig<T>,
    init_rng: &mut R,
) -> Vec<AgentState<T>> {
    let m = config.channels.num_channels();
    (0..config.num_users)
        .map(|user_id| {
            let mut step = init_rng.random::<f64>();
            while step <= 0.0 {
                step = init_rng.random::<f64>();
            }
            AgentState {
                user_id,
                prob_vector: ProbabilityVector::uniform(m)
                    .expect("channel count validated upstream"),
                admission: AdmissionState::new(cast::<T>(step))
                    .expect("draw from (0,1) is a valid step"),
                last_channel: None,
                bits_delivered: 0,
                collisions: 0,
                blocked: 0,
                switches: 0,
            }
        })
        .collect()
}

/// Per-slot tallies produced by [`run_slot`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SlotStats {
    pub bits: u64,
    pub successes: u64,
    /// User-level collision events: each colliding user counts once.
    pub collision_events: u64,
    pub blocked: u64,
}

/// Advance the world one slot. See the module doc for the stage order.
pub fn run_slot<T: Real>(
    config: &SimConfig<T>,
    agents: &mut [AgentState<T>],
    slot: usize,
    streams: &mut EpisodeStreams,
) -> (SlotOutcome, SlotStats) {
    // Environment first, unconditionally: occupancy and the slot SNR come
    // off the env stream every slot so that every policy sees the same
    // channel history under a shared seed.
    let realization = env::draw_realization(&config.channels, slot, &mut streams.env);
    let snr_db = link::draw_snr_db(config.snr_db_range, &mut streams.env);
    let slot_ber = link::ber_from_snr_db(link::effective_snr_db(snr_db, config.energy_per_bit));

    let mut stats = SlotStats::default();
    let uses_gate = config.policy.uses_gate();

    let transmitting: Vec<bool> = agents
        .iter_mut()
        .map(|agent| {
            let admit = !uses_gate || agent.admission.gate(&mut streams.gate);
            if !admit {
                agent.blocked += 1;
                stats.blocked += 1;
            }
            admit
        })
        .collect();

    let mut chosen: Vec<Option<usize>> = vec![None; agents.len()];
    let mut choices: Vec<(usize, usize)> = Vec::with_capacity(agents.len());
    for (agent, &tx) in agents.iter_mut().zip(&transmitting) {
        if tx {
            let channel = agent.prob_vector.sample(&mut streams.sampling);
            agent.note_choice(channel);
            chosen[agent.user_id] = Some(channel);
            choices.push((agent.user_id, channel));
        }
    }

    let outcome = env::classify_outcomes(&realization, &choices);

    let payload = config.channels.payload_bits();
    let mut collided = vec![false; agents.len()];
    for agent in agents.iter_mut() {
        let Some(channel) = chosen[agent.user_id] else {
            continue;
        };
        match &outcome.channels[channel] {
            ChannelOutcome::Success(_) => {
                agent.bits_delivered += payload;
                stats.bits += payload;
                stats.successes += 1;
                match &config.policy {
                    PolicyKind::ClassicUniform => {}
                    PolicyKind::RewardOnly(p) | PolicyKind::RewardPenalty(p) => {
                        agent.prob_vector.reward_update(channel, p.reward_rate);
                    }
                    PolicyKind::QModel(q) => {
                        let response = q.classify(slot_ber);
                        agent.prob_vector.q_update(channel, &response, q);
                    }
                }
            }
            ChannelOutcome::Collision(_) | ChannelOutcome::PrimaryBusy => {
                if matches!(outcome.channels[channel], ChannelOutcome::Collision(_)) {
                    agent.collisions += 1;
                    stats.collision_events += 1;
                    collided[agent.user_id] = true;
                }
                match &config.policy {
                    PolicyKind::ClassicUniform | PolicyKind::RewardOnly(_) => {}
                    PolicyKind::RewardPenalty(p) => {
                        agent.prob_vector.penalty_update(channel, p.penalty_rate);
                    }
                    PolicyKind::QModel(q) => {
                        let response = q.classify(T::one());
                        agent.prob_vector.q_update(channel, &response, q);
                    }
                }
            }
            ChannelOutcome::Idle => unreachable!("a chosen channel cannot be idle"),
        }
    }

    // Gates adjust last: a clean slot (including a blocked one) raises
    // acceptance, an overlap lowers it.
    if uses_gate {
        for agent in agents.iter_mut() {
            agent.admission.update(collided[agent.user_id]);
        }
    }

    (outcome, stats)
}

/// Per-slot totals, per-user finals and the episode aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsAccumulator<T: Real> {
    pub slot_bits: Vec<u64>,
    pub slot_collision_events: Vec<u64>,
    pub slot_blocked: Vec<u64>,
    pub per_user_bits: Vec<u64>,
    pub per_user_switch_cost: Vec<T>,
    pub total_bits: u64,
    pub total_successes: u64,
    pub total_collision_events: u64,
    pub total_blocked: u64,
    pub total_switches: u64,
    pub switch_cost: T,
    pub fairness: T,
    pub blocking_rate: T,
}

impl<T: Real> MetricsAccumulator<T> {
    pub fn new(num_slots: usize) -> Self {
        MetricsAccumulator {
            slot_bits: Vec::with_capacity(num_slots),
            slot_collision_events: Vec::with_capacity(num_slots),
            slot_blocked: Vec::with_capacity(num_slots),
            per_user_bits: Vec::new(),
            per_user_switch_cost: Vec::new(),
            total_bits: 0,
            total_successes: 0,
            total_collision_events: 0,
            total_blocked: 0,
            total_switches: 0,
            switch_cost: T::zero(),
            fairness: T::one(),
            blocking_rate: T::zero(),
        }
    }

    pub fn record_slot(&mut self, stats: &SlotStats) {
        self.slot_bits.push(stats.bits);
        self.slot_collision_events.push(stats.collision_events);
        self.slot_blocked.push(stats.blocked);
        self.total_bits += stats.bits;
        self.total_successes += stats.successes;
        self.total_collision_events += stats.collision_events;
        self.total_blocked += stats.blocked;
    }

    /// Fill the per-user finals and aggregates from the finished population.
    pub fn finalize(&mut self, agents: &[AgentState<T>], config: &SimConfig<T>) {
        self.per_user_bits = agents.iter().map(per_user_throughput).collect();
        self.per_user_switch_cost = agents
            .iter()
            .map(|a| switching_cost(a, config.switch_cost))
            .collect();
        self.total_switches = agents.iter().map(|a| a.switches).sum();
        self.switch_cost = config.switch_cost * cast::<T>(self.total_switches as f64);
        debug_assert_eq!(self.total_bits, total_throughput(agents));
        self.fairness = fairness_index(&self.per_user_bits);
        self.blocking_rate = blocking_rate(agents, config.num_slots);
    }
}

/// A finished episode: the final agent states and every accumulated metric.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult<T: Real> {
    pub agents: Vec<AgentState<T>>,
    pub metrics: MetricsAccumulator<T>,
}

/// Run one full episode under `config.seed`. Identical configs produce
/// identical results, field for field.
pub fn run_episode<T: Real>(config: &SimConfig<T>) -> EpisodeResult<T> {
    config.validate().expect("invalid simulation config");
    let mut streams = EpisodeStreams::new(config.seed);
    let mut agents = init_agents(config, &mut streams.init);
    let mut metrics = MetricsAccumulator::new(config.num_slots);
    for slot in 0..config.num_slots {
        let (_, stats) = run_slot(config, &mut agents, slot, &mut streams);
        metrics.record_slot(&stats);
    }
    metrics.finalize(&agents, config);
    EpisodeResult { agents, metrics }
}

/// Bits the user delivered over the whole episode.
pub fn per_user_throughput<T: Real>(agent: &AgentState<T>) -> u64 {
    agent.bits_delivered
}

/// Total bits delivered by the population.
pub fn total_throughput<T: Real>(agents: &[AgentState<T>]) -> u64 {
    agents.iter().map(|a| a.bits_delivered).sum()
}

/// Cost of the user's channel switches at `cost` per switch.
pub fn switching_cost<T: Real>(agent: &AgentState<T>, cost: T) -> T {
    cost * cast::<T>(agent.switches as f64)
}

/// Jain's index over the per-user bit totals: `(Σ W_n)^2 / (N · Σ W_n^2)`,
/// which lives in [1/N, 1]. An all-zero allocation is defined as perfectly
/// fair. The quotient is clamped into its analytic range to absorb rounding.
pub fn fairness_index<T: Real>(per_user_bits: &[u64]) -> T {
    let n = per_user_bits.len();
    assert!(n >= 1, "fairness needs at least one user");
    let sum: f64 = per_user_bits.iter().map(|&b| b as f64).sum();
    if sum == 0.0 {
        return T::one();
    }
    let sum_sq: f64 = per_user_bits.iter().map(|&b| (b as f64) * (b as f64)).sum();
    let raw = (sum * sum) / (n as f64 * sum_sq);
    cast::<T>(raw.clamp(1.0 / n as f64, 1.0))
}

/// Fraction of user-slots suppressed by the admission gate.
pub fn blocking_rate<T: Real>(agents: &[AgentState<T>], num_slots: usize) -> T {
    let blocked: u64 = agents.iter().map(|a| a.blocked).sum();
    let attempts = (agents.len() as u64) * (num_slots as u64);
    cast::<T>(blocked as f64 / attempts as f64)
}
