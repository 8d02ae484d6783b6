//! Batch execution: a policy-by-replication grid of independent episodes.
//!
//! Every episode seed is derived from the master seed, the policy's position
//! in the configured list and the replication index, so results depend only
//! on the spec, never on scheduling. Episodes may run on any number of worker
//! threads; aggregation happens single-threaded over a vector whose order is
//! fixed by the job list, which keeps the produced tables byte-identical
//! across worker counts.

use std::path::PathBuf;
use std::time::Instant;

use osa_core::policy::PolicyKind;
use osa_core::rng::episode_seed;
use osa_core::sim::{run_episode, MetricsAccumulator, SimConfig};
use rayon::prelude::*;

/// A fully resolved experiment: what to run and where to write it.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// Template episode configuration; `policy` and `seed` are replaced per job.
    pub base: SimConfig<f64>,
    /// Policies in configured order; the order fixes seed derivation.
    pub policies: Vec<PolicyKind<f64>>,
    pub replications: usize,
    pub output_dir: PathBuf,
    /// Worker threads for episode execution; 0 means one per core.
    pub workers: usize,
}

/// Final metrics of one (policy, replication) episode.
#[derive(Debug, Clone)]
pub struct ReplicationRecord {
    pub policy: &'static str,
    pub replication: usize,
    pub metrics: MetricsAccumulator<f64>,
}

/// Mean cumulative delivered bits per slot for one policy, over replications.
#[derive(Debug, Clone)]
pub struct PolicyCurve {
    pub policy: &'static str,
    /// Index t holds the mean of cumulative bits through slot t (0-based).
    pub mean_cumulative_bits: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// Sorted by (policy name, replication).
    pub finals: Vec<ReplicationRecord>,
    /// Sorted by policy name.
    pub curves: Vec<PolicyCurve>,
    /// Wall-clock duration of episode execution and aggregation.
    pub runtime_seconds: f64,
}

/// Run every (policy, replication) episode and aggregate the results.
pub fn run_experiment(spec: &ExperimentSpec) -> ExperimentResult {
    let start = Instant::now();
    let jobs: Vec<(usize, usize)> = (0..spec.policies.len())
        .flat_map(|p| (0..spec.replications).map(move |r| (p, r)))
        .collect();

    let run_job = |&(policy_index, replication): &(usize, usize)| {
        let mut config = spec.base.clone();
        config.policy = spec.policies[policy_index].clone();
        config.seed = episode_seed(spec.base.seed, policy_index, replication);
        run_episode(&config)
    };

    // collect() on an indexed parallel iterator preserves job order, so the
    // episode vector is identical no matter how many threads ran it.
    let episodes: Vec<_> = if spec.workers == 1 {
        jobs.iter().map(run_job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .expect("worker pool construction cannot fail for a sane thread count");
        pool.install(|| jobs.par_iter().map(run_job).collect())
    };

    let mut finals: Vec<ReplicationRecord> = Vec::with_capacity(jobs.len());
    let mut curves: Vec<PolicyCurve> = Vec::with_capacity(spec.policies.len());
    for (policy_index, policy) in spec.policies.iter().enumerate() {
        // u64 cumulative sums stay exact; one division per slot at the end.
        let mut cumulative_sums = vec![0u64; spec.base.num_slots];
        for replication in 0..spec.replications {
            let episode = &episodes[policy_index * spec.replications + replication];
            let mut running = 0u64;
            for (slot, &bits) in episode.metrics.slot_bits.iter().enumerate() {
                running += bits;
                cumulative_sums[slot] += running;
            }
            finals.push(ReplicationRecord {
                policy: policy.name(),
                replication,
                metrics: episode.metrics.clone(),
            });
        }
        curves.push(PolicyCurve {
            policy: policy.name(),
            mean_cumulative_bits: cumulative_sums
                .iter()
                .map(|&sum| sum as f64 / spec.replications as f64)
                .collect(),
        });
    }
    finals.sort_by(|a, b| (a.policy, a.replication).cmp(&(b.policy, b.replication)));
    curves.sort_by(|a, b| a.policy.cmp(b.policy));

    ExperimentResult {
        finals,
        curves,
        runtime_seconds: start.elapsed().as_secs_f64(),
    }
}
