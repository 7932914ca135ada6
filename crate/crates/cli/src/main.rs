//! Command-line harness: wires experiment configs to the engines and emits
//! reproducible CSV/JSON reports.

mod config;
mod runner;

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, ExperimentKind};
use riemgeo::manifold::ModelSpec;

#[derive(Parser)]
#[command(
    name = "riemgeo",
    about = "Geodesics, cut loci and distributional curvature identities on model surfaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct CommonFlags {
    /// JSON config document; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model name, optionally with parameters: `ellipsoid{a:1,b:1,c:2}`.
    #[arg(long)]
    model: Option<String>,
    /// Apex point as `x,y` in main-chart coordinates.
    #[arg(long)]
    apex: Option<String>,
    /// Directions for cut-locus scans.
    #[arg(long = "N")]
    n_directions: Option<usize>,
    /// Quadrature grid per side (power of two).
    #[arg(long)]
    grid: Option<usize>,
    /// Relative residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for every stochastic choice.
    #[arg(long)]
    seed: Option<u64>,
    /// Seeded bumps in the comparison experiment.
    #[arg(long)]
    bumps: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the cut locus: cut times, classes, jumps and weights.
    Cutlocus(CommonFlags),
    /// Verify the distributional Hessian/Laplacian decomposition.
    Pairing(CommonFlags),
    /// Check the curvature comparison inequality on seeded bumps.
    Comparison(CommonFlags),
    /// Run the barrier/viscosity/distributional implication suite.
    Weaksense(CommonFlags),
    /// Run every experiment.
    All(CommonFlags),
}

fn merge(kind: ExperimentKind, flags: &CommonFlags) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let body = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&body)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    cfg.kind = kind;
    if let Some(m) = &flags.model {
        cfg.model = ModelSpec::parse(m)?;
    }
    if let Some(apex) = &flags.apex {
        let parts: Vec<&str> = apex.split(',').collect();
        anyhow::ensure!(parts.len() == 2, "apex must be `x,y`");
        cfg.apex = Some([
            parts[0].trim().parse().context("apex x")?,
            parts[1].trim().parse().context("apex y")?,
        ]);
    }
    if let Some(n) = flags.n_directions {
        cfg.n_directions = n;
    }
    if let Some(g) = flags.grid {
        cfg.grid = g;
    }
    if let Some(t) = flags.tol {
        cfg.tol = t;
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(b) = flags.bumps {
        cfg.n_bumps = b;
    }
    if let Some(o) = &flags.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn main() {
    let cli = Cli::parse();
    let (kind, flags) = match &cli.command {
        Command::Cutlocus(f) => (ExperimentKind::Cutlocus, f),
        Command::Pairing(f) => (ExperimentKind::Pairing, f),
        Command::Comparison(f) => (ExperimentKind::Comparison, f),
        Command::Weaksense(f) => (ExperimentKind::Weaksense, f),
        Command::All(f) => (ExperimentKind::All, f),
    };
    let config = match merge(kind, flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            std::process::exit(2);
        }
    };
    match runner::run(&config) {
        Ok(report) => {
            for check in &report.checks {
                println!(
                    "[{}] {} — {}",
                    if check.pass { "PASS" } else { "FAIL" },
                    check.name,
                    check.detail
                );
            }
            println!(
                "report written to {} ({:.1}s)",
                config.out.join("report.json").display(),
                report.header.wall_clock_s
            );
            std::process::exit(if report.pass { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
