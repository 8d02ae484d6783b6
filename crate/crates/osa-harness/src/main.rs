//! `osa-sim`: command-line front end for seeded spectrum access experiments.
//!
//! ```text
//! osa-sim run --config configs/reference.conf --seed 7 --out results/
//! ```
//!
//! Diagnostics go to stderr and failures exit non-zero; stdout reports the
//! wall-clock runtime, per-policy means and the files written.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use osa_harness::config::{load_spec, Overrides};
use osa_harness::experiment::run_experiment;
use osa_harness::output::{fmt_real, write_outputs};

#[derive(Parser)]
#[command(name = "osa-sim", version, about = "Seeded spectrum access experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured (policy, replication) episode and write CSVs.
    Run {
        /// Path to a key=value config file.
        #[arg(long)]
        config: PathBuf,
        /// Master seed; wins over the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Replications per policy; wins over the config file.
        #[arg(long)]
        replications: Option<usize>,
        /// Policy to run (repeatable); replaces the configured list.
        #[arg(long = "policy", value_name = "NAME")]
        policies: Vec<String>,
        /// Output directory; wins over the config file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Config override, e.g. --set num_users=5 (repeatable, applied
        /// after the file and before the dedicated flags).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::FAILURE
        }
    }
}

fn real_main(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    let Command::Run {
        config,
        seed,
        replications,
        policies,
        out,
        sets,
    } = cli.command;
    let overrides = Overrides {
        seed,
        replications,
        policies,
        output_dir: out,
        sets,
    };
    let spec = load_spec(&config, &overrides)?;
    let result = run_experiment(&spec);
    let paths = write_outputs(&result, &spec.output_dir)?;

    println!(
        "ran {} policies x {} replications of {} slots in {:.3}s",
        spec.policies.len(),
        spec.replications,
        spec.base.num_slots,
        result.runtime_seconds,
    );
    for curve in &result.curves {
        let totals: Vec<f64> = result
            .finals
            .iter()
            .filter(|r| r.policy == curve.policy)
            .map(|r| r.metrics.total_bits as f64)
            .collect();
        let mean = totals.iter().sum::<f64>() / totals.len() as f64;
        println!("  {}: mean total_bits {}", curve.policy, fmt_real(mean));
    }
    for path in &paths {
        println!("wrote {}", path.display());
    }
    Ok(())
}
