//! Channel-selection distributions and their update rules.
//!
//! Each secondary user keeps a [`ProbabilityVector`] over the M channels and
//! adjusts it from slot feedback. The reward form pulls mass toward the chosen
//! channel, the penalty form pushes mass away from it and spreads it evenly
//! over the alternatives, and both are closed under the simplex: entries stay
//! in [0,1] and the sum stays at 1 up to rounding. The Q-model generalizes
//! the binary feedback to graded responses: a [`QModelConfig`] maps a response
//! value in [0,1] to a level on the favorable or unfavorable side of a
//! threshold, and each level carries its own reinforcement rate.
//!
//! [`AdmissionState`] is the per-user transmission gate: a probability that
//! rises by a fixed per-user step after a clean slot and falls by the same
//! step after an overlap, clamped to [0,1].
//!
//! # Example
//! ```
//! use osa_core::policy::ProbabilityVector;
//!
//! let mut p = ProbabilityVector::<f64>::uniform(2).unwrap();
//! p.reward_update(0, 0.5);
//! assert_eq!(p.probs(), &[0.75, 0.25]);
//! ```

use std::fmt;

use rand::Rng;

use crate::scalar::{cast, Real};

/// Errors raised when building policy state from untrusted values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyError {
    ZeroActions,
    TooFewActions,
    RewardRateOutOfRange,
    PenaltyRateOutOfRange,
    EntryOutOfRange { index: usize },
    SumNotOne,
    EmptyLevelSet,
    LevelsNotIncreasing,
    ThresholdOutOfOrder,
    RateCountMismatch,
    StepOutOfRange,
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::ZeroActions => write!(f, "a probability vector needs at least one entry"),
            PolicyError::TooFewActions => {
                write!(f, "penalty-capable policies need at least 2 actions")
            }
            PolicyError::RewardRateOutOfRange => {
                write!(f, "reward rate must lie strictly inside (0, 1)")
            }
            PolicyError::PenaltyRateOutOfRange => write!(f, "penalty rate must lie in [0, 1)"),
            PolicyError::EntryOutOfRange { index } => {
                write!(f, "probability entry {index} is outside [0, 1]")
            }
            PolicyError::SumNotOne => write!(f, "probability entries must sum to 1"),
            PolicyError::EmptyLevelSet => {
                write!(f, "each response side needs at least one level")
            }
            PolicyError::LevelsNotIncreasing => {
                write!(f, "response levels must be strictly increasing within [0, 1]")
            }
            PolicyError::ThresholdOutOfOrder => write!(
                f,
                "threshold must sit strictly between the favorable and unfavorable levels"
            ),
            PolicyError::RateCountMismatch => {
                write!(f, "one reinforcement rate is required per response level")
            }
            PolicyError::StepOutOfRange => {
                write!(f, "admission step must lie strictly inside (0, 1)")
            }
        }
    }
}

impl std::error::Error for PolicyError {}

// ---------------------------------------------------------------------------
// Probability vector
// ---------------------------------------------------------------------------

/// A channel-selection distribution on the M-simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector<T: Real> {
    probs: Vec<T>,
}

impl<T: Real> ProbabilityVector<T> {
    /// The uniform distribution over `num_actions` channels.
    pub fn uniform(num_actions: usize) -> Result<Self, PolicyError> {
        if num_actions == 0 {
            return Err(PolicyError::ZeroActions);
        }
        let p = T::one() / cast::<T>(num_actions as f64);
        Ok(ProbabilityVector {
            probs: vec![p; num_actions],
        })
    }

    /// Wrap an explicit distribution. Entries must lie in [0,1] and sum to 1
    /// within a tolerance scaled to the scalar's precision (1e-9 at double
    /// precision).
    pub fn new(probs: Vec<T>) -> Result<Self, PolicyError> {
        if probs.is_empty() {
            return Err(PolicyError::ZeroActions);
        }
        for (index, &p) in probs.iter().enumerate() {
            if !(p >= T::zero() && p <= T::one()) {
                return Err(PolicyError::EntryOutOfRange { index });
            }
        }
        let sum: T = probs.iter().fold(T::zero(), |acc, &p| acc + p);
        let tol = Self::sum_tolerance(probs.len());
        if (sum - T::one()).abs() > tol {
            return Err(PolicyError::SumNotOne);
        }
        Ok(ProbabilityVector { probs })
    }

    fn sum_tolerance(len: usize) -> T {
        let fp_floor = T::epsilon() * cast::<T>(4.0 * len as f64);
        cast::<T>(1e-9).max(fp_floor)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn get(&self, index: usize) -> T {
        self.probs[index]
    }

    /// Draw one channel index, landing on `m` with probability `P_m`.
    ///
    /// The underlying uniform variate is always drawn at double precision so
    /// the consumed stream is identical across scalar instantiations.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = cast::<T>(rng.random::<f64>());
        let mut acc = T::zero();
        let mut last_positive = 0;
        for (m, &p) in self.probs.iter().enumerate() {
            if p > T::zero() {
                last_positive = m;
            }
            acc = acc + p;
            if u < acc {
                return m;
            }
        }
        // Rounding can leave the running sum a few ulps short of 1; the
        // leftover mass belongs to the last entry that holds any.
        last_positive
    }

    /// Reward form: pull mass toward the chosen channel.
    ///
    /// `P_i' = P_i + rate·(1−P_i)` for the chosen `i`, `P_j' = P_j − rate·P_j`
    /// for every other `j`. Requires `rate` strictly inside (0,1).
    pub fn reward_update(&mut self, chosen: usize, rate: T) {
        assert!(
            rate > T::zero() && rate < T::one(),
            "reward rate must lie strictly inside (0, 1)"
        );
        assert!(chosen < self.probs.len(), "chosen channel out of range");
        for (j, p) in self.probs.iter_mut().enumerate() {
            let next = if j == chosen {
                *p + rate * (T::one() - *p)
            } else {
                *p - rate * *p
            };
            *p = next.max(T::zero()).min(T::one());
        }
    }

    /// Penalty form: push mass away from the chosen channel, spreading it
    /// evenly over the `r−1` alternatives.
    ///
    /// `P_i' = (1−rate)·P_i` for the chosen `i`, `P_j' = rate/(r−1) +
    /// (1−rate)·P_j` for every other `j`. Requires at least 2 actions and
    /// `rate` in [0,1).
    pub fn penalty_update(&mut self, chosen: usize, rate: T) {
        let r = self.probs.len();
        assert!(r >= 2, "penalty update needs at least 2 actions");
        assert!(
            rate >= T::zero() && rate < T::one(),
            "penalty rate must lie in [0, 1)"
        );
        assert!(chosen < r, "chosen channel out of range");
        let spread = rate / cast::<T>((r - 1) as f64);
        let keep = T::one() - rate;
        for (j, p) in self.probs.iter_mut().enumerate() {
            let next = if j == chosen {
                keep * *p
            } else {
                spread + keep * *p
            };
            *p = next.max(T::zero()).min(T::one());
        }
    }

    /// The per-channel decrement the reward form takes from each non-chosen
    /// channel: `g_j = rate·P_j`. For any rate in (0,1), `0 < g_j < P_j`
    /// whenever `P_j > 0`, so no entry can be driven below zero.
    pub fn linear_g(&self, rate: T) -> Vec<T> {
        self.probs.iter().map(|&p| rate * p).collect()
    }

    /// Graded update: apply the reward form at the response level's rate when
    /// the response is favorable, the penalty form when it is unfavorable.
    pub fn q_update(&mut self, chosen: usize, response: &QResponse<T>, config: &QModelConfig<T>) {
        let rate = config.rate_for(response);
        if response.favorable {
            self.reward_update(chosen, rate);
        } else {
            self.penalty_update(chosen, rate);
        }
    }
}

// ---------------------------------------------------------------------------
// Shared rate parameters
// ---------------------------------------------------------------------------

/// Reward and penalty rates shared by the binary-feedback policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyParams<T: Real> {
    pub reward_rate: T,
    pub penalty_rate: T,
    pub num_actions: usize,
}

impl<T: Real> PolicyParams<T> {
    /// Validate rates against their admissible ranges: reward strictly inside
    /// (0,1), penalty in [0,1). The penalty form divides by `num_actions − 1`,
    /// so fewer than 2 actions is rejected here.
    pub fn new(reward_rate: T, penalty_rate: T, num_actions: usize) -> Result<Self, PolicyError> {
        if !(reward_rate > T::zero() && reward_rate < T::one()) {
            return Err(PolicyError::RewardRateOutOfRange);
        }
        if !(penalty_rate >= T::zero() && penalty_rate < T::one()) {
            return Err(PolicyError::PenaltyRateOutOfRange);
        }
        if num_actions < 2 {
            return Err(PolicyError::TooFewActions);
        }
        Ok(PolicyParams {
            reward_rate,
            penalty_rate,
            num_actions,
        })
    }
}

// ---------------------------------------------------------------------------
// Q-model: graded responses
// ---------------------------------------------------------------------------

/// Graded-response configuration: level values on both sides of a threshold,
/// each with its own reinforcement rate.
///
/// Levels are stored in increasing value order on both sides. Favorable level
/// 1 is the smallest favorable value (the best response); unfavorable level 1
/// is the largest unfavorable value (the worst). The full ordering is
/// `0 ≤ fav[0] < … < fav[R−1] < threshold < unfav[0] < … < unfav[P−1] ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QModelConfig<T: Real> {
    favorable_levels: Vec<T>,
    unfavorable_levels: Vec<T>,
    threshold: T,
    favorable_rates: Vec<T>,
    unfavorable_rates: Vec<T>,
}

impl<T: Real> QModelConfig<T> {
    /// Validate the level ordering and the per-level rates. `favorable_rates`
    /// is indexed by favorable level (entry 0 is level 1, the best response);
    /// `unfavorable_rates` by unfavorable level (entry 0 is level 1, the
    /// worst response).
    pub fn new(
        favorable_levels: Vec<T>,
        unfavorable_levels: Vec<T>,
        threshold: T,
        favorable_rates: Vec<T>,
        unfavorable_rates: Vec<T>,
    ) -> Result<Self, PolicyError> {
        if favorable_levels.is_empty() || unfavorable_levels.is_empty() {
            return Err(PolicyError::EmptyLevelSet);
        }
        let increasing = |levels: &[T]| {
            levels.windows(2).all(|w| w[0] < w[1])
                && levels[0] >= T::zero()
                && *levels.last().unwrap() <= T::one()
        };
        if !increasing(&favorable_levels) || !increasing(&unfavorable_levels) {
            return Err(PolicyError::LevelsNotIncreasing);
        }
        if !(*favorable_levels.last().unwrap() < threshold && threshold < unfavorable_levels[0]) {
            return Err(PolicyError::ThresholdOutOfOrder);
        }
        if favorable_rates.len() != favorable_levels.len()
            || unfavorable_rates.len() != unfavorable_levels.len()
        {
            return Err(PolicyError::RateCountMismatch);
        }
        if !favorable_rates
            .iter()
            .all(|&a| a > T::zero() && a < T::one())
        {
            return Err(PolicyError::RewardRateOutOfRange);
        }
        if !unfavorable_rates
            .iter()
            .all(|&b| b >= T::zero() && b < T::one())
        {
            return Err(PolicyError::PenaltyRateOutOfRange);
        }
        Ok(QModelConfig {
            favorable_levels,
            unfavorable_levels,
            threshold,
            favorable_rates,
            unfavorable_rates,
        })
    }

    pub fn num_favorable(&self) -> usize {
        self.favorable_levels.len()
    }

    pub fn num_unfavorable(&self) -> usize {
        self.unfavorable_levels.len()
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    /// Map a response value in [0,1] to its side and nearest level.
    ///
    /// A value at or below the threshold is favorable. The level is the one
    /// whose value is nearest on the matching side; an exact midpoint goes to
    /// the lower value, the better level on either side (lower index on the
    /// favorable side, less-bad value on the unfavorable side). A value
    /// outside [0,1] is a programming fault.
    pub fn classify(&self, response_value: T) -> QResponse<T> {
        assert!(
            response_value >= T::zero() && response_value <= T::one(),
            "response value must lie in [0, 1]"
        );
        let favorable = response_value <= self.threshold;
        let levels = if favorable {
            &self.favorable_levels
        } else {
            &self.unfavorable_levels
        };
        let mut best = 0;
        let mut best_dist = (levels[0] - response_value).abs();
        for (k, &level) in levels.iter().enumerate().skip(1) {
            let dist = (level - response_value).abs();
            if dist < best_dist {
                best = k;
                best_dist = dist;
            }
        }
        let level_index = if favorable {
            best + 1
        } else {
            levels.len() - best
        };
        QResponse {
            favorable,
            level_index,
            level_value: levels[best],
        }
    }

    /// Reinforcement rate for a classified response.
    pub fn rate_for(&self, response: &QResponse<T>) -> T {
        let rates = if response.favorable {
            &self.favorable_rates
        } else {
            &self.unfavorable_rates
        };
        assert!(
            response.level_index >= 1 && response.level_index <= rates.len(),
            "response level out of range"
        );
        rates[response.level_index - 1]
    }
}

/// A classified graded response: which side of the threshold, and which level
/// on that side. Level 1 is the best favorable response and the worst
/// unfavorable one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QResponse<T: Real> {
    pub favorable: bool,
    pub level_index: usize,
    pub level_value: T,
}

// ---------------------------------------------------------------------------
// Admission control
// ---------------------------------------------------------------------------

/// Per-user transmission gate: attempt probability `acceptance`, adjusted by
/// the per-user `step` after every slot and clamped to [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissionState<T: Real> {
    acceptance: T,
    step: T,
}

impl<T: Real> AdmissionState<T> {
    /// A fresh gate admits unconditionally; `step` is the user's fixed
    /// adjustment, drawn once at connection from (0,1).
    pub fn new(step: T) -> Result<Self, PolicyError> {
        if !(step > T::zero() && step < T::one()) {
            return Err(PolicyError::StepOutOfRange);
        }
        Ok(AdmissionState {
            acceptance: T::one(),
            step,
        })
    }

    pub fn acceptance(&self) -> T {
        self.acceptance
    }

    pub fn step(&self) -> T {
        self.step
    }

    /// Raise acceptance by the step after a clean slot, lower it after an
    /// overlap, clamping to [0,1] either way.
    pub fn update(&mut self, collided: bool) {
        self.acceptance = if collided {
            (self.acceptance - self.step).max(T::zero())
        } else {
            (self.acceptance + self.step).min(T::one())
        };
    }

    /// Decide whether to attempt transmission this slot: true with
    /// probability `acceptance`. The uniform variate is drawn at double
    /// precision for cross-scalar stream identity.
    pub fn gate<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        cast::<T>(rng.random::<f64>()) < self.acceptance
    }
}

// ---------------------------------------------------------------------------
// Policy variants
// ---------------------------------------------------------------------------

/// The channel-selection policies under comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind<T: Real> {
    /// Uniform random selection every slot; no learning.
    ClassicUniform,
    /// Reward form on success; collisions and busy channels leave the vector
    /// unchanged.
    RewardOnly(PolicyParams<T>),
    /// Reward form on success, penalty form on collision or busy channel.
    RewardPenalty(PolicyParams<T>),
    /// Graded responses drive per-level reward/penalty updates, and the
    /// admission gate throttles transmission attempts.
    QModel(QModelConfig<T>),
}

impl<T: Real> PolicyKind<T> {
    /// Stable identifier used in output files and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::ClassicUniform => "classic",
            PolicyKind::RewardOnly(_) => "reward_only",
            PolicyKind::RewardPenalty(_) => "reward_penalty",
            PolicyKind::QModel(_) => "qmodel",
        }
    }

    /// Whether agents running this policy consult the admission gate before
    /// transmitting.
    pub fn uses_gate(&self) -> bool {
        matches!(self, PolicyKind::QModel(_))
    }

    /// Whether this policy ever applies the penalty form, which needs at
    /// least 2 channels to spread mass over.
    pub fn uses_penalty(&self) -> bool {
        matches!(self, PolicyKind::RewardPenalty(_) | PolicyKind::QModel(_))
    }
}
