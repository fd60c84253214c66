//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use synthmix::ExperimentConfig;

use crate::error::{CliError, CliResult};
use crate::grid::Grid;

#[derive(Debug, Parser)]
#[command(name = "synthmix", version, about = "Theory curves and simulations for ridge classifiers on real plus pruned synthetic data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed-point triple along a grid of p/n.
    Deltas(DeltasArgs),
    /// Accuracy against the synthetic proportion for several verifiers.
    Mixing(MixingArgs),
    /// Fully synthetic accuracy against the label-noise rate.
    Phase(PhaseArgs),
    /// Eigenvalues of fitted generator covariances with the limiting density.
    Spectrum(SpectrumArgs),
    /// Theoretical statistics for one config, as JSON.
    Theory(CommonArgs),
    /// Monte Carlo for one config, as JSON.
    Simulate(CommonArgs),
    /// Theory against simulation for one config; exits with 4 on failure.
    Validate(ValidateArgs),
    /// Mixing experiment on a labelled CSV dataset.
    Ingest(IngestArgs),
    /// Generic sweep described by a JSON file.
    Sweep(SweepArgs),
}

/// Verifier presets `(ρ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// (0, 1)
    Oracle,
    /// (1, 1)
    None,
    /// (1, 0.5)
    Weak,
    /// (0.2, 0.9)
    Strong,
}

impl Preset {
    pub fn rho_phi(self) -> (f64, f64) {
        match self {
            Preset::Oracle => (0.0, 1.0),
            Preset::None => (1.0, 1.0),
            Preset::Weak => (1.0, 0.5),
            Preset::Strong => (0.2, 0.9),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Oracle => "oracle",
            Preset::None => "none",
            Preset::Weak => "weak",
            Preset::Strong => "strong",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum EpsilonMode {
    /// Use the configured ε everywhere.
    #[default]
    Fixed,
    /// ε is the error of a classifier trained on the unpruned synthetic set alone.
    Coupled,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config; unspecified fields fall back to built-in defaults only when no file is given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trials per point; 0 skips simulation where allowed.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Test points per trial.
    #[arg(long)]
    pub n_test: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `a:b:steps` (inclusive, evenly spaced) or a comma-separated list.
    #[arg(long)]
    pub grid: Option<Grid>,
    /// Sets (ρ, φ) before any explicit --rho/--phi.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n_hat: Option<usize>,
    #[arg(long)]
    pub mu_norm: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub mu_perp_norm: Option<f64>,
}

pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_N_TEST: usize = 20_000;

impl CommonArgs {
    /// Config file (or defaults) with command-line overrides applied, unvalidated.
    pub fn base_config(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => synthmix::load_config(path)?,
            None => ExperimentConfig::default(),
        };
        self.apply(&mut cfg);
        Ok(cfg)
    }

    /// Validated config.
    pub fn config(&self) -> CliResult<ExperimentConfig> {
        let cfg = self.base_config()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(preset) = self.preset {
            (cfg.rho, cfg.phi) = preset.rho_phi();
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        set!(seed, p, n, m, n_hat, mu_norm, gamma, epsilon, rho, phi, sigma, beta, mu_perp_norm);
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn n_test(&self) -> CliResult<usize> {
        match self.n_test.unwrap_or(DEFAULT_N_TEST) {
            0 => Err(CliError::Usage("--n-test must be at least 1".into())),
            k => Ok(k),
        }
    }

    pub fn grid_or(&self, default: &str) -> Grid {
        self.grid.clone().unwrap_or_else(|| default.parse().expect("valid default grid"))
    }
}

#[derive(Debug, Args)]
pub struct DeltasArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct MixingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Verifier presets to compare.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Preset::Oracle, Preset::Weak])]
    pub presets: Vec<Preset>,
    #[arg(long, value_enum, default_value_t)]
    pub epsilon_mode: EpsilonMode,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Synthetic sample counts.
    #[arg(long, default_value = "200,1000,10000")]
    pub m_grid: Grid,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Generator sample sizes; defaults to the config's n_hat.
    #[arg(long)]
    pub n_hat_grid: Option<Grid>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Largest accepted |empirical − theoretical| accuracy gap.
    #[arg(long, default_value_t = 0.02)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub csv: PathBuf,
    /// Header name, or a zero-based column index.
    #[arg(long)]
    pub label_column: String,
    /// Raw label value to map to +1 instead of the lexicographically larger one.
    #[arg(long)]
    pub positive_label: Option<String>,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Preset::Oracle, Preset::None])]
    pub presets: Vec<Preset>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// JSON sweep description.
    #[arg(long)]
    pub spec: PathBuf,
}
