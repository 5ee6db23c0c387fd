//! Experiment configuration, ensemble orchestration and reports.
//!
//! Every experiment maps ensemble members to per-path results in parallel,
//! then aggregates them in member order, so a report depends only on its
//! configuration.

mod config;
mod convergence;
mod integrals;
mod monte_carlo;
mod pathwise;
mod report;

use std::time::Instant;

use pwcalc_core::paths::generate;
use pwcalc_core::stats::{median, tree_sum};
use pwcalc_core::SampledPath;
use rayon::prelude::*;

pub use config::{member_seed, ExperimentConfig, ExperimentKind};
pub use report::{CheckKind, Metadata, Report, Table, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] pwcalc_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Cross-check fast algorithms against brute-force oracles.
    pub oracle: bool,
}

/// Runs one experiment and, when `output_dir` is set, writes its artifacts.
pub fn run(config: &ExperimentConfig, options: RunOptions) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let mut report = match config.experiment {
        ExperimentKind::BdgCertify => pathwise::bdg_certify(config)?,
        ExperimentKind::Sandwich => pathwise::sandwich(config)?,
        ExperimentKind::QvConverge => convergence::qv_converge(config, options)?,
        ExperimentKind::TtvConverge => convergence::ttv_converge(config, options)?,
        ExperimentKind::CompareQv => convergence::compare_qv_estimators(config)?,
        ExperimentKind::IsometryMc => monte_carlo::isometry(config)?,
        ExperimentKind::BdgMc => monte_carlo::bdg(config)?,
        ExperimentKind::IntegralConverge => integrals::integral_converge(config)?,
        ExperimentKind::DistanceRates => integrals::distance_rates(config)?,
    };
    report.metadata = Some(Metadata {
        runtime_seconds: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        unix_time: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        version: env!("CARGO_PKG_VERSION").into(),
    });
    if let Some(dir) = &config.output_dir {
        report.write(std::path::Path::new(dir))?;
    }
    Ok(report)
}

/// Dyadic-Lebesgue, averaged-shifted and truncated-variation QV estimates side by side.
pub fn compare_qv_estimators(config: &ExperimentConfig) -> Result<Report> {
    let mut cfg = config.clone();
    cfg.experiment = ExperimentKind::CompareQv;
    run(&cfg, RunOptions::default())
}

/// `f(i, path_i)` for every ensemble member, in member order.
fn ensemble<T, F>(config: &ExperimentConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &SampledPath) -> Result<T> + Sync,
{
    (0..config.ensemble_size)
        .into_par_iter()
        .map(|i| {
            let path = generate(&config.member(i))?;
            f(i, &path)
        })
        .collect()
}

fn column_mean(xs: &[f64]) -> f64 {
    tree_sum(xs) / xs.len() as f64
}

/// Medians of each column of per-member rows.
fn column_medians(rows: &[Vec<f64>]) -> Vec<f64> {
    let width = rows.first().map_or(0, Vec::len);
    (0..width).map(|j| median(&rows.iter().map(|r| r[j]).collect::<Vec<_>>())).collect()
}

/// Strictly decreasing, except that a run of exact zeros counts as converged.
fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}
