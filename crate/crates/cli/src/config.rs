//! Run configuration: one TOML file with a section per command. Unknown keys
//! are rejected; command-line flags override file values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use geocond::backtest::Method;
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub simulate: SimulateConfig,
    pub fit: FitConfig,
    pub backtest: BacktestConfig,
    pub verify: VerifyConfig,
    pub barycenter: BarycenterConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub dim: usize,
    pub steps: usize,
    pub dt: f64,
    pub a: f64,
    pub c: f64,
    pub h: f64,
    pub k: f64,
    /// Row-major `dim × dim` start point; `None` uses the built-in daily covariance.
    pub x0: Option<Vec<f64>>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            dim: 2,
            steps: 1000,
            dt: 1.0,
            a: -0.5,
            c: 6.25e-7,
            h: 1.0,
            k: 1.5625e-5,
            x0: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub input: Option<PathBuf>,
    pub dt: f64,
    pub warmup: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            input: None,
            dt: 1.0,
            warmup: 15,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BacktestConfig {
    pub input: Option<PathBuf>,
    pub window: usize,
    pub window_grid: Vec<usize>,
    pub split: f64,
    pub warmup: usize,
    pub gammas: Vec<f64>,
    pub methods: Vec<String>,
    pub resamples: usize,
    pub alpha: f64,
    pub fit_fraction: f64,
    pub params: Option<PathBuf>,
    pub flat: bool,
    pub whitened_carry: bool,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            input: None,
            window: 7,
            window_grid: Vec::new(),
            split: 0.25,
            warmup: 15,
            gammas: vec![0.0, 0.5, 1.0],
            methods: Method::ALL.iter().map(|m| m.key().to_string()).collect(),
            resamples: 10_000,
            alpha: 0.05,
            fit_fraction: 0.25,
            params: None,
            flat: false,
            whitened_carry: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub models: Vec<PathBuf>,
    pub substeps: usize,
    pub schedule_len: usize,
    pub grid_levels: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            models: Vec::new(),
            substeps: 64,
            schedule_len: 11,
            grid_levels: 2,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarycenterConfig {
    pub input: Option<PathBuf>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BarycenterConfig {
    fn default() -> Self {
        BarycenterConfig {
            input: None,
            tol: 1e-12,
            max_iter: 500,
        }
    }
}

/// Every key with its unit and default, for `--help`.
pub const CONFIG_HELP: &str = "\
CONFIG KEYS (TOML; flags override file values)
  seed                     u64, RNG seed; required by simulate and backtest      [none]
  out                      path, output directory                                [out]

  [simulate]
  dim                      assets D (matrix size)                                [2]
  steps                    number of time steps T                                [1000]
  dt                       time step, > 0, in days                              [1.0]
  a                        coordinate drift rate, 1/day                          [-0.5]
  c                        state noise scale, covariance units / sqrt(day)       [6.25e-7]
  h                        observation gain, dimensionless, != 0                 [1.0]
  k                        observation noise scale, covariance units*sqrt(day)   [1.5625e-5]
  x0                       row-major D*D start matrix                            [built-in daily covariance]

  [fit]
  input                    path, observation CSV (as written by simulate)        [none]
  dt                       time step, > 0, in days                              [1.0]
  warmup                   observations averaged for the chart anchor            [15]

  [backtest]
  input                    path, price CSV (date column, then one per asset)     [none]
  window                   rolling covariance window, trading days, >= 2         [7]
  window_grid              candidate windows for sequential validation           [] (off)
  split                    calibration fraction for validation, (0, 1]           [0.25]
  warmup                   observations skipped before scoring                   [15]
  gammas                   risk-aversion values for portfolio weights            [0, 0.5, 1]
  methods                  subset of nkf, euc, nkf-int, nkf-ext                  [all four]
  resamples                bootstrap resamples B, >= 1000                       [10000]
  alpha                    two-sided interval level, (0, 1)                     [0.05]
  fit_fraction             MLE calibration prefix fraction, (0, 1]              [0.25]
  params                   path, params.toml from `fit`; skips MLE               [none]
  flat                     run the N-KF family with flat geometry                [false]
  whitened_carry           rescale P by the chart Jacobian on re-anchoring       [false]

  [verify]
  models                   model JSON paths; empty runs the bundled models        []
  substeps                 fine substep count for the convergence check          [64]
  schedule_len             number of n values (doubling) in the Gamma check     [11]
  grid_levels              geodesic grid levels per cell in the Gamma check     [2]

  [barycenter]
  input                    path, matrix CSV with optional `weight` column       [none]
  tol                      Riemannian gradient-norm tolerance                    [1e-12]
  max_iter                 iteration cap                                         [500]

EXIT CODES
  0 success, 1 verification failure, 2 usage, config or IO error

ENVIRONMENT
  GEOCOND_LOG              log level filter (error, warn, info, debug)           [warn]";

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn require_seed(&self, command: &str) -> Result<u64> {
        match self.seed {
            Some(s) => Ok(s),
            None => bail!("`{command}` is stochastic: pass --seed or set `seed` in the config"),
        }
    }
}

fn positive_finite(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        bail!("{name} must be positive and finite, got {x}");
    }
    Ok(())
}

impl SimulateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            bail!("simulate.dim must be at least 1");
        }
        if self.steps == 0 {
            bail!("simulate.steps must be at least 1");
        }
        positive_finite("simulate.dt", self.dt)?;
        if let Some(x0) = &self.x0 {
            if x0.len() != self.dim * self.dim {
                bail!(
                    "simulate.x0 needs {} entries, got {}",
                    self.dim * self.dim,
                    x0.len()
                );
            }
        }
        Ok(())
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        positive_finite("fit.dt", self.dt)?;
        if self.warmup == 0 {
            bail!("fit.warmup must be at least 1");
        }
        Ok(())
    }
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 || self.window_grid.iter().any(|&w| w < 2) {
            bail!("backtest windows must be at least 2");
        }
        if !(self.split > 0.0 && self.split <= 1.0) {
            bail!("backtest.split must lie in (0, 1]");
        }
        if !(self.fit_fraction > 0.0 && self.fit_fraction <= 1.0) {
            bail!("backtest.fit_fraction must lie in (0, 1]");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("backtest.alpha must lie in (0, 1)");
        }
        if self.resamples < 1000 {
            bail!("backtest.resamples must be at least 1000");
        }
        if self.gammas.is_empty() || self.gammas.iter().any(|g| !g.is_finite()) {
            bail!("backtest.gammas must be a nonempty list of finite values");
        }
        self.method_list()?;
        Ok(())
    }

    pub fn method_list(&self) -> Result<Vec<Method>> {
        if self.methods.is_empty() {
            bail!("backtest.methods is empty");
        }
        let mut out = Vec::new();
        for s in &self.methods {
            let m: Method = s.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(out)
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.substeps == 0 || self.schedule_len == 0 || self.grid_levels == 0 {
            bail!("verify.substeps, schedule_len and grid_levels must be at least 1");
        }
        Ok(())
    }
}

impl BarycenterConfig {
    pub fn validate(&self) -> Result<()> {
        positive_finite("barycenter.tol", self.tol)?;
        if self.max_iter == 0 {
            bail!("barycenter.max_iter must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.backtest.resamples, 10_000);
        assert_eq!(c.backtest.warmup, 15);
        assert_eq!(c.simulate.dt, 1.0);
        assert!(c.seed.is_none());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("sed = 3").is_err());
        assert!(RunConfig::parse("[backtest]\nwindw = 3").is_err());
    }

    #[test]
    fn help_lists_every_key() {
        let keys = [
            "seed",
            "out",
            "dim",
            "steps",
            "dt",
            "a ",
            "c ",
            "h ",
            "k ",
            "x0",
            "input",
            "warmup",
            "window ",
            "window_grid",
            "split",
            "gammas",
            "methods",
            "resamples",
            "alpha",
            "fit_fraction",
            "params",
            "flat",
            "whitened_carry",
            "models",
            "substeps",
            "schedule_len",
            "grid_levels",
            "tol",
            "max_iter",
        ];
        for k in keys {
            assert!(CONFIG_HELP.contains(&format!("  {k}")), "{k}");
        }
    }

    #[test]
    fn validation_ranges() {
        let mut s = SimulateConfig::default();
        s.dt = 0.0;
        assert!(s.validate().is_err());
        let mut b = BacktestConfig::default();
        b.methods = vec!["nkf".into(), "kf".into()];
        assert!(b.validate().is_err());
        assert!(BacktestConfig::default().validate().is_ok());
    }
}
