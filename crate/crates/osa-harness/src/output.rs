//! Result serialization: two CSV tables and a human-readable summary.
//!
//! All files use `\n` line endings and end with a newline. Integers are
//! written verbatim; every real number goes through [`fmt_real`], which
//! always emits exactly 9 significant digits so that equal values produce
//! equal bytes and reruns of the same spec diff clean.

use std::io;
use std::path::{Path, PathBuf};

use crate::experiment::ExperimentResult;

/// Format a finite real with exactly 9 significant digits.
///
/// Zero becomes `0.000000000`. Values whose decimal exponent lies in
/// [-4, 8] are written positionally (`515000.000`, `0.000123456789`);
/// anything larger or smaller keeps scientific notation (`1.23456789e9`).
///
/// # Example
///
/// ```
/// use osa_harness::output::fmt_real;
///
/// assert_eq!(fmt_real(0.25), "0.250000000");
/// assert_eq!(fmt_real(515_000.0), "515000.000");
/// assert_eq!(fmt_real(0.0), "0.000000000");
/// ```
pub fn fmt_real(x: f64) -> String {
    assert!(x.is_finite(), "refusing to serialize a non-finite value");
    if x == 0.0 {
        return "0.000000000".to_string();
    }
    // {:.8e} rounds to 9 significant digits and exposes the decimal exponent.
    let sci = format!("{x:.8e}");
    let e_at = sci.find('e').expect("{:.8e} always contains an exponent");
    let exponent: i32 = sci[e_at + 1..].parse().expect("exponent is an integer");
    if (-4..=8).contains(&exponent) {
        let decimals = (8 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Write curves.csv, finals.csv and summary.txt into `dir`, creating it if
/// needed. Returns the paths written, in that order.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let curves_path = dir.join("curves.csv");
    let finals_path = dir.join("finals.csv");
    let summary_path = dir.join("summary.txt");
    std::fs::write(&curves_path, render_curves(result))?;
    std::fs::write(&finals_path, render_finals(result))?;
    std::fs::write(&summary_path, render_summary(result))?;
    Ok(vec![curves_path, finals_path, summary_path])
}

fn render_curves(result: &ExperimentResult) -> String {
    let mut out = String::from("policy,slot,mean_cumulative_bits\n");
    for curve in &result.curves {
        for (index, &mean) in curve.mean_cumulative_bits.iter().enumerate() {
            let slot = index + 1;
            out.push_str(&format!("{},{slot},{}\n", curve.policy, fmt_real(mean)));
        }
    }
    out
}

fn render_finals(result: &ExperimentResult) -> String {
    let mut out = String::from(
        "policy,replication,total_bits,fairness,blocking_rate,collisions,switch_cost,runtime_s\n",
    );
    for record in &result.finals {
        let m = &record.metrics;
        // Per-row runtimes would differ between reruns and worker counts, so
        // the column is pinned to zero and wall-clock time goes to stdout.
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            record.policy,
            record.replication,
            m.total_bits,
            fmt_real(m.fairness),
            fmt_real(m.blocking_rate),
            m.total_collision_events,
            fmt_real(m.switch_cost),
            fmt_real(0.0),
        ));
    }
    out
}

fn render_summary(result: &ExperimentResult) -> String {
    let mut out = String::new();
    let mut index = 0;
    while index < result.finals.len() {
        let policy = result.finals[index].policy;
        let totals: Vec<f64> = result
            .finals
            .iter()
            .filter(|r| r.policy == policy)
            .map(|r| r.metrics.total_bits as f64)
            .collect();
        index += totals.len();
        let n = totals.len() as f64;
        let mean = totals.iter().sum::<f64>() / n;
        let std = if totals.len() < 2 {
            0.0
        } else {
            let ss: f64 = totals.iter().map(|w| (w - mean) * (w - mean)).sum();
            (ss / (n - 1.0)).sqrt()
        };
        out.push_str(&format!(
            "{policy}: total_bits mean {} +/- {} over {} replications\n",
            fmt_real(mean),
            fmt_real(std),
            totals.len(),
        ));
    }
    out
}
