use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use pwcalc_cli::{run, ExperimentConfig, ExperimentKind, RunOptions};

/// Pathwise stochastic calculus experiments.
#[derive(Debug, Parser)]
#[command(name = "pwcalc", version)]
struct Cli {
    /// bdg-certify, qv-converge, ttv-converge, sandwich, isometry-mc, bdg-mc,
    /// integral-converge, distance-rates or compare-qv.
    experiment: ExperimentKind,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.json, metadata.json and the CSV tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit nonzero when a statistical check fails, not only a pathwise one.
    #[arg(long)]
    strict_mc: bool,
    /// Cross-check fast algorithms against brute-force oracles.
    #[arg(long)]
    oracle: bool,
}

fn main() -> ExitCode {
    match try_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn try_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("PWCALC_THREADS") {
        let n: usize = n.parse().context("PWCALC_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let text = std::fs::read_to_string(&cli.config)
        .with_context(|| format!("reading {}", cli.config.display()))?;
    let mut config: ExperimentConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", cli.config.display()))?;
    if config.experiment != cli.experiment {
        anyhow::bail!("config is for {} but {} was requested", config.experiment, cli.experiment);
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = Some(out.display().to_string());
    }
    let report = run(&config, RunOptions { oracle: cli.oracle })?;
    print!("{}", report.summary());
    Ok(if report.failed(cli.strict_mc) { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}
