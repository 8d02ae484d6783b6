//! Experiment configuration: a flat key=value file plus command-line
//! overrides, validated into an [`ExperimentSpec`].
//!
//! Format: UTF-8 text, one `key = value` per line, `#` starts a comment,
//! blank lines are ignored. Unknown keys are hard errors, as are malformed
//! lines and out-of-range values; a later line wins over an earlier one for
//! the same key. Overrides given as `key=value` pairs are applied after the
//! file and are validated against the same key set; the dedicated flags
//! (seed, replications, policies, output directory) are applied last.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use osa_core::env::ChannelSet;
use osa_core::policy::{PolicyKind, PolicyParams, QModelConfig};
use osa_core::sim::SimConfig;

use crate::experiment::ExperimentSpec;

/// Every key the config format accepts.
const KNOWN_KEYS: &[&str] = &[
    "num_channels",
    "num_users",
    "num_slots",
    "payload_bits",
    "bandwidth_hz",
    "theta",
    "theta_seed",
    "theta_range",
    "alpha",
    "beta",
    "switch_cost",
    "snr_db_range",
    "energy_per_bit",
    "legacy_initial_throughput",
    "seed",
    "replications",
    "policies",
    "workers",
    "output_dir",
    "q_threshold",
    "q_favorable_levels",
    "q_unfavorable_levels",
    "q_favorable_rates",
    "q_unfavorable_rates",
];

/// Line number 0 marks a command-line override rather than a file line.
const OVERRIDE_LINE: usize = 0;

#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, source: io::Error },
    Parse { line: usize, message: String },
    UnknownKey { line: usize, key: String },
    Invalid { field: &'static str, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let place = |line: usize| {
            if line == OVERRIDE_LINE {
                "command-line override".to_string()
            } else {
                format!("config line {line}")
            }
        };
        match self {
            ConfigError::Io { path, source } => {
                write!(f, "cannot read config {}: {source}", path.display())
            }
            ConfigError::Parse { line, message } => write!(f, "{}: {message}", place(*line)),
            ConfigError::UnknownKey { line, key } => {
                write!(f, "{}: unknown key `{key}`", place(*line))
            }
            ConfigError::Invalid { field, message } => write!(f, "invalid {field}: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ConfigError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Command-line layer applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    /// Replaces the configured policy list when non-empty.
    pub policies: Vec<String>,
    pub output_dir: Option<PathBuf>,
    /// Raw `key=value` pairs, applied in order after the file.
    pub sets: Vec<String>,
}

/// Key/value pairs with the line each came from.
struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (index, raw_line) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    message: "missing key before `=`".to_string(),
                });
            }
            Self::insert_checked(&mut entries, key, value, line)?;
        }
        Ok(RawConfig { entries })
    }

    fn insert_checked(
        entries: &mut BTreeMap<String, (String, usize)>,
        key: &str,
        value: &str,
        line: usize,
    ) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        entries.insert(key.to_string(), (value.to_string(), line));
        Ok(())
    }

    fn apply_set(&mut self, pair: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = pair.split_once('=') else {
            return Err(ConfigError::Parse {
                line: OVERRIDE_LINE,
                message: format!("expected `key=value`, got `{pair}`"),
            });
        };
        Self::insert_checked(&mut self.entries, key.trim(), value.trim(), OVERRIDE_LINE)
    }

    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn parse_with<T>(&self, key: &str, what: &str, default: T) -> Result<T, ConfigError>
    where
        T: std::str::FromStr,
    {
        match self.raw(key) {
            None => Ok(default),
            Some((value, line)) => value.parse().map_err(|_| ConfigError::Parse {
                line,
                message: format!("expected {what} for {key}, got `{value}`"),
            }),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.parse_with(key, "a real number", default)
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.parse_with(key, "a non-negative integer", default)
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        self.parse_with(key, "a non-negative integer", default)
    }

    fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some((value, line)) => value
                .split(',')
                .map(|item| {
                    item.trim().parse().map_err(|_| ConfigError::Parse {
                        line,
                        message: format!("expected a comma-separated list of reals for {key}, got `{value}`"),
                    })
                })
                .collect(),
        }
    }

    fn pair_or(&self, key: &str, default: (f64, f64)) -> Result<(f64, f64), ConfigError> {
        let list = self.f64_list(key, &[default.0, default.1])?;
        if list.len() != 2 {
            let line = self.raw(key).map(|(_, l)| l).unwrap_or(OVERRIDE_LINE);
            return Err(ConfigError::Parse {
                line,
                message: format!("expected exactly two comma-separated reals for {key}"),
            });
        }
        Ok((list[0], list[1]))
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

fn require(cond: bool, field: &'static str, message: impl Into<String>) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(invalid(field, message))
    }
}

/// Load, override and validate an experiment description.
pub fn load_spec(path: &Path, overrides: &Overrides) -> Result<ExperimentSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut raw = RawConfig::parse(&text)?;
    for pair in &overrides.sets {
        raw.apply_set(pair)?;
    }

    let num_channels = raw.usize_or("num_channels", 10)?;
    let num_users = raw.usize_or("num_users", 100)?;
    let num_slots = raw.usize_or("num_slots", 4000)?;
    let payload_bits = raw.u64_or("payload_bits", 100_000)?;
    let bandwidth_hz = raw.f64_or("bandwidth_hz", 1.0)?;
    let alpha = raw.f64_or("alpha", 0.5)?;
    let beta = raw.f64_or("beta", 0.5)?;
    let switch_cost = raw.f64_or("switch_cost", 1.0)?;
    let snr_db_range = raw.pair_or("snr_db_range", (0.0, 9.0))?;
    let energy_per_bit = raw.f64_or("energy_per_bit", 1.0)?;
    let legacy_initial_throughput = raw.f64_or("legacy_initial_throughput", 3.0)?;
    let seed = overrides.seed.unwrap_or(raw.u64_or("seed", 1)?);
    let replications = overrides
        .replications
        .unwrap_or(raw.usize_or("replications", 20)?);
    let workers = raw.usize_or("workers", 0)?;
    let output_dir = overrides.output_dir.clone().unwrap_or_else(|| {
        raw.raw("output_dir")
            .map(|(v, _)| PathBuf::from(v))
            .unwrap_or_else(|| PathBuf::from("out"))
    });

    require(num_channels >= 1, "num_channels", "need at least 1 channel")?;
    require(num_users >= 1, "num_users", "need at least 1 user")?;
    require(num_slots >= 1, "num_slots", "need at least 1 slot")?;
    require(payload_bits >= 1, "payload_bits", "need at least 1 bit per slot")?;
    require(bandwidth_hz > 0.0, "bandwidth_hz", "must be positive")?;
    require(
        alpha > 0.0 && alpha < 1.0,
        "alpha",
        format!("must lie strictly inside (0, 1), got {alpha}"),
    )?;
    require(
        (0.0..1.0).contains(&beta),
        "beta",
        format!("must lie in [0, 1), got {beta}"),
    )?;
    require(switch_cost >= 0.0, "switch_cost", "must be non-negative")?;
    require(
        snr_db_range.0 <= snr_db_range.1,
        "snr_db_range",
        "lower bound must not exceed the upper bound",
    )?;
    require(energy_per_bit > 0.0, "energy_per_bit", "must be positive")?;
    require(replications >= 1, "replications", "need at least 1 replication")?;

    let channels = build_channels(
        &raw,
        num_channels,
        payload_bits,
        bandwidth_hz,
    )?;
    let q_config = build_q_config(&raw)?;
    let policy_names: Vec<String> = if overrides.policies.is_empty() {
        raw.raw("policies")
            .map(|(v, _)| v.to_string())
            .unwrap_or_else(|| "classic,reward_only,reward_penalty,qmodel".to_string())
            .split(',')
            .map(|s| s.trim().to_string())
            .collect()
    } else {
        overrides.policies.clone()
    };
    let policies = build_policies(&policy_names, alpha, beta, num_channels, &q_config)?;

    let base = SimConfig {
        channels,
        num_users,
        num_slots,
        policy: policies[0].clone(),
        switch_cost,
        snr_db_range,
        energy_per_bit,
        seed,
        legacy_initial_throughput,
    };
    for policy in &policies {
        let mut probe = base.clone();
        probe.policy = policy.clone();
        probe
            .validate()
            .map_err(|e| invalid("policies", e.to_string()))?;
    }

    Ok(ExperimentSpec {
        base,
        policies,
        replications,
        output_dir,
        workers,
    })
}

fn build_channels(
    raw: &RawConfig,
    num_channels: usize,
    payload_bits: u64,
    bandwidth_hz: f64,
) -> Result<ChannelSet<f64>, ConfigError> {
    let explicit = raw.raw("theta").is_some();
    let seeded = raw.raw("theta_seed").is_some();
    if explicit && seeded {
        return Err(invalid(
            "theta",
            "theta and theta_seed are mutually exclusive",
        ));
    }
    if raw.raw("theta_range").is_some() && !seeded {
        return Err(invalid("theta_range", "theta_range requires theta_seed"));
    }
    if seeded {
        let spread_seed = raw.u64_or("theta_seed", 0)?;
        let (lo, hi) = raw.pair_or("theta_range", (0.1, 0.9))?;
        require(
            (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo <= hi,
            "theta_range",
            "bounds must satisfy 0 <= lo <= hi <= 1",
        )?;
        return ChannelSet::seeded_spread(num_channels, lo, hi, payload_bits, bandwidth_hz, spread_seed)
            .map_err(|e| invalid("theta_range", e.to_string()));
    }
    let theta = raw.f64_list("theta", &vec![0.5; num_channels])?;
    require(
        theta.len() == num_channels,
        "theta",
        format!(
            "expected {num_channels} probabilities (num_channels), got {}",
            theta.len()
        ),
    )?;
    require(
        theta.iter().all(|p| (0.0..=1.0).contains(p)),
        "theta",
        "every probability must lie in [0, 1]",
    )?;
    ChannelSet::new(theta, payload_bits, bandwidth_hz).map_err(|e| invalid("theta", e.to_string()))
}

fn build_q_config(raw: &RawConfig) -> Result<QModelConfig<f64>, ConfigError> {
    let threshold = raw.f64_or("q_threshold", 0.5)?;
    let favorable_levels = raw.f64_list("q_favorable_levels", &[0.01, 0.05])?;
    let unfavorable_levels = raw.f64_list("q_unfavorable_levels", &[0.7, 0.9])?;
    let favorable_rates = raw.f64_list("q_favorable_rates", &[0.5, 0.25])?;
    let unfavorable_rates = raw.f64_list("q_unfavorable_rates", &[0.5, 0.25])?;

    let ascending = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
    require(
        !favorable_levels.is_empty()
            && ascending(&favorable_levels)
            && favorable_levels[0] >= 0.0,
        "q_favorable_levels",
        "must be a non-empty increasing list of reals starting at or above 0",
    )?;
    require(
        !unfavorable_levels.is_empty()
            && ascending(&unfavorable_levels)
            && *unfavorable_levels.last().unwrap() <= 1.0,
        "q_unfavorable_levels",
        "must be a non-empty increasing list of reals ending at or below 1",
    )?;
    require(
        *favorable_levels.last().unwrap() < threshold && threshold < unfavorable_levels[0],
        "q_threshold",
        "must sit strictly between the favorable and unfavorable levels",
    )?;
    require(
        favorable_rates.len() == favorable_levels.len(),
        "q_favorable_rates",
        "need exactly one rate per favorable level",
    )?;
    require(
        unfavorable_rates.len() == unfavorable_levels.len(),
        "q_unfavorable_rates",
        "need exactly one rate per unfavorable level",
    )?;
    require(
        favorable_rates.iter().all(|&a| a > 0.0 && a < 1.0),
        "q_favorable_rates",
        "each rate must lie strictly inside (0, 1)",
    )?;
    require(
        unfavorable_rates.iter().all(|&b| (0.0..1.0).contains(&b)),
        "q_unfavorable_rates",
        "each rate must lie in [0, 1)",
    )?;
    QModelConfig::new(
        favorable_levels,
        unfavorable_levels,
        threshold,
        favorable_rates,
        unfavorable_rates,
    )
    .map_err(|e| invalid("q_threshold", e.to_string()))
}

fn build_policies(
    names: &[String],
    alpha: f64,
    beta: f64,
    num_channels: usize,
    q_config: &QModelConfig<f64>,
) -> Result<Vec<PolicyKind<f64>>, ConfigError> {
    require(!names.is_empty(), "policies", "need at least one policy")?;
    let mut policies = Vec::with_capacity(names.len());
    let params = || {
        PolicyParams::new(alpha, beta, num_channels).map_err(|_| {
            invalid(
                "policies",
                "learning policies need at least 2 channels to spread penalty mass over",
            )
        })
    };
    for name in names {
        let policy = match name.as_str() {
            "classic" => PolicyKind::ClassicUniform,
            "reward_only" => PolicyKind::RewardOnly(params()?),
            "reward_penalty" => PolicyKind::RewardPenalty(params()?),
            "qmodel" => {
                require(
                    num_channels >= 2,
                    "policies",
                    "qmodel needs at least 2 channels",
                )?;
                PolicyKind::QModel(q_config.clone())
            }
            other => {
                return Err(invalid(
                    "policies",
                    format!(
                        "unknown policy `{other}` (expected classic, reward_only, reward_penalty or qmodel)"
                    ),
                ))
            }
        };
        if policies.iter().any(|p: &PolicyKind<f64>| p.name() == name) {
            return Err(invalid("policies", format!("policy `{name}` listed twice")));
        }
        policies.push(policy);
    }
    Ok(policies)
}
