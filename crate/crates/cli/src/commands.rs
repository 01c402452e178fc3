//! The five subcommands. Each returns [`Outcome`]; any error maps to exit 2.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use geocond::backtest::{
    attach_intervals, base_covariance, load_prices, rolling_cov, run_benchmark,
    sequential_validation, write_report_csv, write_report_md, BenchmarkConfig,
};
use geocond::expectation::{
    bundled_models, verify_model, AnyModel, GammaCheckOptions, VerifyOptions,
};
use geocond::filter::{mle_fit, simulate_ssm, write_long_csv, CarryMode, CoordParams, SsmParams};
use geocond::spd::{
    barycenter_residual, intrinsic_barycenter, intrinsic_barycenter_default, spd_exp, spd_log,
    WeightedPointCloud,
};
use geocond::sym::{vech, vech_len, SpdMatrix, SymMatrix};
use geocond::SpdManifold;

use crate::config::RunConfig;
use crate::matrix_io::{read_matrices, vech_headers};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn require_input<'a>(input: &'a Option<PathBuf>, command: &str) -> Result<&'a Path> {
    let p = input
        .as_deref()
        .with_context(|| format!("`{command}` needs an input file (--input or {command}.input)"))?;
    if !p.is_file() {
        bail!("input file {} does not exist", p.display());
    }
    Ok(p)
}

/// Writes `latent.csv` (T + 1 points) and `observed.csv` (T points) in long format.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let s = &cfg.simulate;
    s.validate()?;
    let seed = cfg.require_seed("simulate")?;
    let m = SpdManifold::new(s.dim);
    let coord = CoordParams::new(s.a, s.c, s.h, s.k)?;
    let params = SsmParams::uniform(vech_len(s.dim), coord, s.dt)?;
    let x0 = match &s.x0 {
        Some(v) => SpdMatrix::from_row_slice(s.dim, v).context("simulate.x0")?,
        None => base_covariance(s.dim)?,
    };
    let sim = simulate_ssm(&m, &params, &x0, s.steps, seed)?;
    let dir = prepare_out(cfg)?;
    write_long_csv(
        fs::File::create(dir.join("latent.csv"))?,
        &m,
        &[("latent", &sim.times, &sim.latent)],
    )?;
    write_long_csv(
        fs::File::create(dir.join("observed.csv"))?,
        &m,
        &[("observed", &sim.times[1..], &sim.observed)],
    )?;
    println!(
        "wrote {} latent and {} observed points to {}",
        sim.latent.len(),
        sim.observed.len(),
        dir.display()
    );
    Ok(Outcome::Success)
}

/// Tangent coordinates at the intrinsic barycenter of the first `warmup`
/// observations, fitted by maximum likelihood; writes `params.toml`.
pub fn cmd_fit(cfg: &RunConfig) -> Result<Outcome> {
    let f = &cfg.fit;
    f.validate()?;
    let input = require_input(&f.input, "fit")?;
    let (obs, _) = read_matrices(input)?;
    let n0 = f.warmup.min(obs.len());
    let anchor = intrinsic_barycenter_default(&WeightedPointCloud::uniform(obs[..n0].to_vec())?)?;
    let coords: Vec<Vec<f64>> = obs
        .iter()
        .map(|o| Ok(vech(&spd_log(&anchor, o)?).into_vec()))
        .collect::<geocond::Result<_>>()?;
    let fit = mle_fit(&coords, f.dt)?;
    let dir = prepare_out(cfg)?;
    let path = dir.join("params.toml");
    fs::write(&path, toml::to_string(&fit.params)?)?;
    let total: f64 = fit.loglik.iter().sum();
    println!(
        "fitted {} coordinates on {} observations, log-likelihood {total:.6e}; wrote {}",
        coords[0].len(),
        obs.len(),
        path.display()
    );
    Ok(Outcome::Success)
}

fn load_params(path: &Path, dim: usize) -> Result<SsmParams> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let p: SsmParams =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    p.validate()?;
    if p.coords.len() != vech_len(dim) {
        bail!(
            "{}: {} coordinates, data needs {}",
            path.display(),
            p.coords.len(),
            vech_len(dim)
        );
    }
    Ok(p)
}

/// Rolling covariances, the four forecasters, error norms and BCa intervals;
/// writes `report.csv` and `report.md`.
pub fn cmd_backtest(cfg: &RunConfig) -> Result<Outcome> {
    let b = &cfg.backtest;
    b.validate()?;
    let input = require_input(&b.input, "backtest")?;
    let seed = cfg.require_seed("backtest")?;
    let panel = load_prices(input)?;
    let params = match &b.params {
        Some(p) => Some(load_params(p, panel.n_assets())?),
        None => None,
    };
    let bench = BenchmarkConfig {
        warmup: b.warmup,
        gammas: b.gammas.clone(),
        methods: b.method_list()?,
        params,
        fit_fraction: b.fit_fraction,
        flat_geometry: b.flat,
        carry: if b.whitened_carry {
            CarryMode::Whitened
        } else {
            CarryMode::Keep
        },
    };
    let window = if b.window_grid.is_empty() {
        b.window
    } else {
        let w = sequential_validation(&panel, &b.window_grid, b.split, &bench)?;
        log::info!("sequential validation chose window {w}");
        w
    };
    let series = rolling_cov(&panel, window)?;
    let mut report = run_benchmark(&series, &bench)?;
    report.check_norm_ordering()?;
    attach_intervals(&mut report, b.resamples, b.alpha, seed)?;
    let dir = prepare_out(cfg)?;
    write_report_csv(&report, fs::File::create(dir.join("report.csv"))?)?;
    write_report_md(&report, fs::File::create(dir.join("report.md"))?)?;
    println!(
        "window {window}, {} scored days, {} methods; wrote report.csv and report.md to {}",
        report.n_scored,
        report.methods().len(),
        dir.display()
    );
    Ok(Outcome::Success)
}

/// Pass/fail per invariant on each model; exit 1 if any fails.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let v = &cfg.verify;
    v.validate()?;
    let models: Vec<(String, AnyModel)> = if v.models.is_empty() {
        bundled_models()
    } else {
        v.models
            .iter()
            .map(|p| {
                let m =
                    AnyModel::load(p).with_context(|| format!("loading model {}", p.display()))?;
                Ok((p.display().to_string(), m))
            })
            .collect::<Result<_>>()?
    };
    let opts = VerifyOptions {
        fine_substeps: v.substeps,
        gamma: GammaCheckOptions {
            grid_levels: v.grid_levels,
            schedule_len: v.schedule_len,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut all = true;
    for (name, m) in &models {
        for c in verify_model(m, &opts)? {
            println!("{name}: {c}");
            all &= c.passed;
        }
    }
    Ok(if all {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

fn anchored_mean(points: &[SpdMatrix], weights: &[f64]) -> Result<SpdMatrix> {
    let first = &points[0];
    let mut acc = SymMatrix::zeros(first.dim());
    for (p, &w) in points.iter().zip(weights) {
        acc = acc.add(&spd_log(first, p)?.scale(w));
    }
    Ok(spd_exp(first, &acc)?)
}

/// Intrinsic and first-point-anchored barycenters; writes `barycenter.csv`.
pub fn cmd_barycenter(cfg: &RunConfig) -> Result<Outcome> {
    let bc = &cfg.barycenter;
    bc.validate()?;
    let input = require_input(&bc.input, "barycenter")?;
    let (points, weights) = read_matrices(input)?;
    let cloud = match weights {
        Some(w) => WeightedPointCloud::new(points, w)?,
        None => WeightedPointCloud::uniform(points)?,
    };
    let intrinsic = intrinsic_barycenter(&cloud, bc.tol, bc.max_iter)?;
    let extrinsic = anchored_mean(cloud.points(), cloud.weights())?;
    let dir = prepare_out(cfg)?;
    let mut w = csv::Writer::from_path(dir.join("barycenter.csv"))?;
    let mut header = vec!["kind".to_string(), "residual".to_string()];
    header.extend(vech_headers(intrinsic.dim()));
    w.write_record(&header)?;
    for (kind, x) in [("intrinsic", &intrinsic), ("extrinsic", &extrinsic)] {
        let r = barycenter_residual(x, &cloud)?;
        let mut row = vec![kind.to_string(), format!("{r:e}")];
        row.extend(
            vech(&x.as_sym())
                .as_slice()
                .iter()
                .map(|v| format!("{v:e}")),
        );
        w.write_record(&row)?;
        println!("{kind}: residual {r:.3e}, matrix {:?}", x.to_row_vec());
    }
    w.flush()?;
    Ok(Outcome::Success)
}
