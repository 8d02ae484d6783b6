//! Experiment harness for the opportunistic spectrum access simulator.
//!
//! Ties the [`osa_core`] engine to the outside world: a flat key=value
//! config format with command-line overrides ([`config`]), a seeded
//! policy-by-replication batch runner whose output is independent of the
//! worker count ([`experiment`]), and deterministic CSV/summary writers
//! ([`output`]). The `osa-sim` binary is a thin shell over these modules.
//!
//! # Example
//!
//! ```no_run
//! use std::path::Path;
//!
//! use osa_harness::config::{load_spec, Overrides};
//! use osa_harness::experiment::run_experiment;
//! use osa_harness::output::write_outputs;
//!
//! let overrides = Overrides { seed: Some(7), ..Overrides::default() };
//! let spec = load_spec(Path::new("configs/reference.conf"), &overrides)?;
//! let result = run_experiment(&spec);
//! write_outputs(&result, &spec.output_dir)?;
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{load_spec, ConfigError, Overrides};
pub use experiment::{run_experiment, ExperimentResult, ExperimentSpec};
pub use output::{fmt_real, write_outputs};
