//! Core library for a seeded, replicable discrete-time simulator of
//! opportunistic spectrum access: secondary users pick licensed channels via
//! probability-vector learning rules and an admission-control gate, and the
//! engine scores throughput, collisions, blocking, switching cost and
//! fairness per slot.
//!
//! All numeric state is generic over the scalar type (see [`Real`]); the
//! aliases at the crate root fix `f64`, which is what the experiment harness
//! uses.

pub mod env;
pub mod link;
pub mod policy;
pub mod rng;
pub mod scalar;
pub mod sim;

pub use scalar::Real;

/// Double-precision aliases for the simulation types.
pub type ChannelSet = env::ChannelSet<f64>;
pub type ProbabilityVector = policy::ProbabilityVector<f64>;
pub type PolicyParams = policy::PolicyParams<f64>;
pub type QModelConfig = policy::QModelConfig<f64>;
pub type QResponse = policy::QResponse<f64>;
pub type AdmissionState = policy::AdmissionState<f64>;
pub type PolicyKind = policy::PolicyKind<f64>;
pub type SimConfig = sim::SimConfig<f64>;
pub type AgentState = sim::AgentState<f64>;
pub type MetricsAccumulator = sim::MetricsAccumulator<f64>;
pub type EpisodeResult = sim::EpisodeResult<f64>;
