//! Command-line front end: argument parsing, config merging and the
//! subcommand implementations.

pub mod commands;
pub mod config;
pub mod matrix_io;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

pub use commands::Outcome;
use config::{RunConfig, CONFIG_HELP};

#[derive(Debug, Parser)]
#[command(name = "geocond", version, about = "Geodesic conditional expectation and manifold Kalman filtering", after_help = CONFIG_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// RNG seed; required by simulate and backtest.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Input file for fit, backtest or barycenter; model file for verify.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Simulate the tangent-coordinate state-space model on SPD(D).
    Simulate {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        /// Time step in days.
        #[arg(long, allow_hyphen_values = true)]
        dt: Option<f64>,
    },
    /// Fit state-space parameters by maximum likelihood.
    Fit,
    /// Run the covariance forecasting benchmark.
    Backtest {
        /// Comma-separated subset of nkf, euc, nkf-int, nkf-ext.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        resamples: Option<usize>,
    },
    /// Check conditional-expectation invariants on bundled or given models.
    Verify,
    /// Intrinsic and extrinsic barycenters of a matrix CSV.
    Barycenter,
}

/// The file config with command-line overrides applied.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    match &cli.command {
        Command::Simulate { dim, steps, dt } => {
            if let Some(d) = dim {
                cfg.simulate.dim = *d;
            }
            if let Some(s) = steps {
                cfg.simulate.steps = *s;
            }
            if let Some(t) = dt {
                cfg.simulate.dt = *t;
            }
        }
        Command::Fit => {
            if cli.input.is_some() {
                cfg.fit.input = cli.input.clone();
            }
        }
        Command::Backtest {
            methods,
            window,
            resamples,
        } => {
            if cli.input.is_some() {
                cfg.backtest.input = cli.input.clone();
            }
            if let Some(m) = methods {
                cfg.backtest.methods = m.clone();
            }
            if let Some(w) = window {
                cfg.backtest.window = *w;
                cfg.backtest.window_grid.clear();
            }
            if let Some(r) = resamples {
                cfg.backtest.resamples = *r;
            }
        }
        Command::Verify => {
            if let Some(p) = &cli.input {
                cfg.verify.models = vec![p.clone()];
            }
        }
        Command::Barycenter => {
            if cli.input.is_some() {
                cfg.barycenter.input = cli.input.clone();
            }
        }
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = resolve(cli)?;
    match cli.command {
        Command::Simulate { .. } => commands::cmd_simulate(&cfg),
        Command::Fit => commands::cmd_fit(&cfg),
        Command::Backtest { .. } => commands::cmd_backtest(&cfg),
        Command::Verify => commands::cmd_verify(&cfg),
        Command::Barycenter => commands::cmd_barycenter(&cfg),
    }
}
