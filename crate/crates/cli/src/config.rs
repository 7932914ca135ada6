//! Experiment configuration: one JSON document, CLI flags override fields.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use riemgeo::manifold::ModelSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Cutlocus,
    Pairing,
    Comparison,
    Weaksense,
    All,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    /// Apex point in main-chart coordinates; model default when absent.
    pub apex: Option<[f64; 2]>,
    pub kind: ExperimentKind,
    /// Directions for cut-locus scans.
    pub n_directions: usize,
    /// Quadrature grid (per side) for pairings.
    pub grid: usize,
    /// Relative residual tolerance for pairings.
    pub tol: f64,
    /// Seeded bumps per model in the comparison experiment.
    pub n_bumps: usize,
    pub seed: u64,
    /// Output directory.
    pub out: PathBuf,
    /// Direction density of the singular-quadrature cut scan.
    pub cut_density: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::new("torus"),
            apex: None,
            kind: ExperimentKind::All,
            n_directions: 512,
            grid: 512,
            tol: 1e-3,
            n_bumps: 10,
            seed: 7,
            out: PathBuf::from("out"),
            cut_density: 2048,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.tol <= 0.0 {
            anyhow::bail!("config field `tol`: must be positive, got {}", self.tol);
        }
        if self.n_directions < 8 {
            anyhow::bail!(
                "config field `n_directions`: need at least 8, got {}",
                self.n_directions
            );
        }
        if self.grid < 16 || !self.grid.is_power_of_two() {
            anyhow::bail!(
                "config field `grid`: need a power of two ≥ 16, got {}",
                self.grid
            );
        }
        self.model.build::<f64>().map_err(|e| {
            anyhow::anyhow!("config field `model`: {e}")
        })?;
        Ok(())
    }
}
