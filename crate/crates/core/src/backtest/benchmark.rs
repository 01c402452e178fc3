//! One-step-ahead covariance forecasting benchmark.
//!
//! Four forecasters share the per-coordinate Kalman machinery:
//!
//! | method   | geometry | chart                                   |
//! |----------|----------|------------------------------------------|
//! | N-KF     | SPD      | re-anchored at every estimate            |
//! | N-KF-int | SPD      | fixed at the intrinsic warmup barycenter |
//! | N-KF-ext | SPD      | fixed at the extrinsic warmup barycenter |
//! | EUC      | flat     | re-anchored, i.e. a local-level KF on entries |
//!
//! Parameters come from the config or from per-coordinate MLE on the
//! calibration prefix, read in the chart at the warmup barycenter.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::metrics::{matrix_errors, weight_errors, MatrixNorm};
use super::rolling::CovObservationSeries;
use crate::error::{GeoError, Result};
use crate::filter::{
    fixed_anchor_filter, mle_fit, riccati_steady_state, run_nkf, CarryMode, CoordParams,
    FilterState, SsmParams,
};
use crate::manifold::{karcher_mean, BarycenterOptions, EuclideanSpace, Manifold, SpdManifold};
use crate::markowitz::{efficient_weights, efficient_weights_sym};
use crate::spd::extrinsic_barycenter;
use crate::sym::{sym_from_vech, vech, SpdMatrix, SymMatrix, VechVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "nkf")]
    Nkf,
    #[serde(rename = "euc")]
    Euc,
    #[serde(rename = "nkf-int")]
    NkfInt,
    #[serde(rename = "nkf-ext")]
    NkfExt,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Nkf, Method::Euc, Method::NkfInt, Method::NkfExt];

    pub fn label(self) -> &'static str {
        match self {
            Method::Nkf => "N-KF",
            Method::Euc => "EUC",
            Method::NkfInt => "N-KF-int",
            Method::NkfExt => "N-KF-ext",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Method::Nkf => "nkf",
            Method::Euc => "euc",
            Method::NkfInt => "nkf-int",
            Method::NkfExt => "nkf-ext",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self> {
        let k = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.key() == k || m.label().eq_ignore_ascii_case(&k))
            .ok_or_else(|| {
                GeoError::InvalidInput(format!("unknown method `{s}` (nkf, euc, nkf-int, nkf-ext)"))
            })
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    /// Observations used for the fixed anchors and skipped in scoring.
    pub warmup: usize,
    pub gammas: Vec<f64>,
    pub methods: Vec<Method>,
    /// Fixed parameters for every method; `None` fits them by MLE.
    pub params: Option<SsmParams>,
    /// Calibration prefix for MLE, as a fraction of the series (at least 30 points).
    pub fit_fraction: f64,
    /// Runs the N-KF family with flat geometry on matrix entries.
    pub flat_geometry: bool,
    pub carry: CarryMode,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            warmup: 15,
            gammas: vec![0.0, 0.5, 1.0],
            methods: Method::ALL.to_vec(),
            params: None,
            fit_fraction: 0.25,
            flat_geometry: false,
            carry: CarryMode::Keep,
        }
    }
}

/// `Frobenius`, `MaxModulus`, `Inf`, `Spectral` for matrices; `L2`, `LInf`
/// for portfolio weights at a given γ.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub method: Method,
    pub metric: String,
    pub gamma: Option<f64>,
    /// Mean over scored dates.
    pub value: f64,
    pub daily: Vec<f64>,
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub entries: Vec<ReportEntry>,
    pub n_scored: usize,
}

impl MetricReport {
    pub fn get(&self, method: Method, metric: &str, gamma: Option<f64>) -> Option<&ReportEntry> {
        self.entries
            .iter()
            .find(|e| e.method == method && e.metric == metric && e.gamma == gamma)
    }

    pub fn methods(&self) -> Vec<Method> {
        let mut out: Vec<Method> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.method) {
                out.push(e.method);
            }
        }
        out
    }

    /// Checks `MaxModulus ≤ Spectral ≤ Frobenius` and `LInf ≤ L2` day by day.
    pub fn check_norm_ordering(&self) -> Result<()> {
        let tol = |x: f64| 1e-12 * (1.0 + x.abs());
        for m in self.methods() {
            let daily = |metric: &str, g: Option<f64>| self.get(m, metric, g).map(|e| &e.daily);
            if let (Some(mm), Some(sp), Some(fr)) = (
                daily("MaxModulus", None),
                daily("Spectral", None),
                daily("Frobenius", None),
            ) {
                for ((a, b), c) in mm.iter().zip(sp).zip(fr) {
                    if a > &(b + tol(*b)) || b > &(c + tol(*c)) {
                        return Err(GeoError::InvalidInput(format!(
                            "norm ordering violated for {m}"
                        )));
                    }
                }
            }
            for e in self
                .entries
                .iter()
                .filter(|e| e.method == m && e.metric == "LInf")
            {
                if let Some(l2) = daily("L2", e.gamma) {
                    if e.daily.iter().zip(l2).any(|(a, b)| a > &(b + tol(*b))) {
                        return Err(GeoError::InvalidInput(format!(
                            "weight norm ordering violated for {m}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn vech_point(s: &SpdMatrix) -> Vec<f64> {
    vech(&s.as_sym()).into_vec()
}

fn flat_matrix(v: &[f64], d: usize) -> Result<DMatrix<f64>> {
    Ok(sym_from_vech(&VechVector::new(d, v.to_vec())?).into_matrix())
}

fn mean_vec(pts: &[Vec<f64>]) -> Vec<f64> {
    let mut acc = vec![0.0; pts[0].len()];
    for p in pts {
        for (a, x) in acc.iter_mut().zip(p) {
            *a += x;
        }
    }
    acc.iter().map(|a| a / pts.len() as f64).collect()
}

fn fallback_coord() -> CoordParams {
    CoordParams {
        a: 0.0,
        c: 1.0,
        h: 1.0,
        k: 1.0,
    }
}

/// MLE per coordinate with unit time step; coordinates whose fit fails
/// (too short or constant) fall back to a unit local-level model.
pub fn fit_params(coords: &[Vec<f64>]) -> Result<SsmParams> {
    let d = coords.first().map_or(0, |c| c.len());
    if d == 0 {
        return Err(GeoError::InvalidInput("no coordinates to fit".into()));
    }
    if let Ok(fit) = mle_fit(coords, 1.0) {
        return Ok(fit.params);
    }
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let col: Vec<Vec<f64>> = coords.iter().map(|c| vec![c[i]]).collect();
        match mle_fit(&col, 1.0) {
            Ok(fit) => out.push(fit.params.coords[0]),
            Err(e) => {
                log::warn!("coordinate {i}: {e}; using a unit local-level model");
                out.push(fallback_coord());
            }
        }
    }
    SsmParams::new(out, 1.0)
}

fn steady_p(params: &SsmParams) -> Vec<f64> {
    params
        .coords
        .iter()
        .map(|c| riccati_steady_state(c, params.dt))
        .collect()
}

fn fit_len(n: usize, cfg: &BenchmarkConfig) -> usize {
    ((cfg.fit_fraction * n as f64).ceil() as usize)
        .max(30)
        .min(n)
}

fn resolve_params<M: Manifold>(
    m: &M,
    anchor: &M::Point,
    pts: &[M::Point],
    cfg: &BenchmarkConfig,
) -> Result<SsmParams> {
    if let Some(p) = &cfg.params {
        p.check_dim(m.coord_dim())?;
        return Ok(p.clone());
    }
    let n = fit_len(pts.len(), cfg);
    let coords = pts[..n]
        .iter()
        .map(|p| m.log(anchor, p))
        .collect::<Result<Vec<_>>>()?;
    fit_params(&coords)
}

/// Forecasts of the re-anchored filter, index `t` predicting `t + 1`.
fn reanchored<M: Manifold>(
    m: &M,
    pts: &[M::Point],
    params: &SsmParams,
    carry: CarryMode,
) -> Result<Vec<M::Point>> {
    let init = FilterState::new(pts[0].clone(), steady_p(params));
    Ok(run_nkf(m, init, pts, params, carry)?.forecasts)
}

fn fixed<M: Manifold>(
    m: &M,
    anchor: &M::Point,
    pts: &[M::Point],
    params: &SsmParams,
) -> Result<Vec<M::Point>> {
    Ok(fixed_anchor_filter(m, anchor, &steady_p(params), pts, params)?.forecasts)
}

/// Raw forecast matrices per method.
pub fn forecast_all(
    series: &CovObservationSeries,
    cfg: &BenchmarkConfig,
) -> Result<Vec<(Method, Vec<DMatrix<f64>>)>> {
    let n = series.len();
    if n < cfg.warmup + 2 || cfg.warmup == 0 {
        return Err(GeoError::InvalidInput(format!(
            "series of length {n} too short for warmup {}",
            cfg.warmup
        )));
    }
    let d = series.dim();
    let obs = &series.observations;
    let flat_pts: Vec<Vec<f64>> = obs.iter().map(vech_point).collect();
    let flat = EuclideanSpace::new(flat_pts[0].len());
    let flat_anchor = mean_vec(&flat_pts[..cfg.warmup]);
    let to_flat = |v: Vec<Vec<f64>>| {
        v.iter()
            .map(|p| flat_matrix(p, d))
            .collect::<Result<Vec<_>>>()
    };
    let to_spd = |v: Vec<SpdMatrix>| {
        v.into_iter()
            .map(|p| p.matrix().clone())
            .collect::<Vec<_>>()
    };

    let needs_nkf_params = cfg.methods.iter().any(|m| *m != Method::Euc);
    let euc_params = if cfg.methods.contains(&Method::Euc) || cfg.flat_geometry {
        Some(resolve_params(&flat, &flat_anchor, &flat_pts, cfg)?)
    } else {
        None
    };
    let spd = SpdManifold::new(d);
    let (int_anchor, nkf_params) = if needs_nkf_params && !cfg.flat_geometry {
        let warm = &obs[..cfg.warmup];
        let opts = BarycenterOptions::scaled_default(&spd, warm)?;
        let weights = vec![1.0 / cfg.warmup as f64; cfg.warmup];
        let bary = karcher_mean(&spd, warm, &weights, &opts, None)?;
        let params = resolve_params(&spd, &bary, obs, cfg)?;
        (Some(bary), Some(params))
    } else {
        (None, None)
    };

    let mut out = Vec::new();
    for &method in Method::ALL.iter().filter(|m| cfg.methods.contains(m)) {
        let fc = match (method, cfg.flat_geometry) {
            (Method::Euc, _) | (Method::Nkf, true) => to_flat(reanchored(
                &flat,
                &flat_pts,
                euc_params.as_ref().expect("fitted"),
                cfg.carry,
            )?)?,
            (Method::NkfInt | Method::NkfExt, true) => to_flat(fixed(
                &flat,
                &flat_anchor,
                &flat_pts,
                euc_params.as_ref().expect("fitted"),
            )?)?,
            (Method::Nkf, false) => to_spd(reanchored(
                &spd,
                obs,
                nkf_params.as_ref().expect("fitted"),
                cfg.carry,
            )?),
            (Method::NkfInt, false) => {
                let anchor = int_anchor.as_ref().expect("computed");
                to_spd(fixed(
                    &spd,
                    anchor,
                    obs,
                    nkf_params.as_ref().expect("fitted"),
                )?)
            }
            (Method::NkfExt, false) => {
                let anchor = extrinsic_barycenter(&obs[..cfg.warmup])?;
                to_spd(fixed(
                    &spd,
                    &anchor,
                    obs,
                    nkf_params.as_ref().expect("fitted"),
                )?)
            }
        };
        out.push((method, fc));
    }
    Ok(out)
}

fn portfolio(gamma: f64, mu: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<DVector<f64>> {
    match SpdMatrix::new(sigma.clone()) {
        Ok(s) => Ok(efficient_weights(gamma, mu, &s)?.as_vector().clone()),
        Err(_) => Ok(
            efficient_weights_sym(gamma, mu, &SymMatrix::new(sigma.clone())?)?
                .as_vector()
                .clone(),
        ),
    }
}

/// Scores the forecast made at each date `t ≥ warmup` against the
/// observation at `t + 1`, or the known truth at `t + 1` when the series
/// carries one.
pub fn run_benchmark(series: &CovObservationSeries, cfg: &BenchmarkConfig) -> Result<MetricReport> {
    if cfg.methods.is_empty() {
        return Err(GeoError::InvalidInput("no methods selected".into()));
    }
    let forecasts = forecast_all(series, cfg)?;
    let n = series.len();
    let scored: Vec<usize> = (cfg.warmup..n - 1).collect();
    let mut entries = Vec::new();
    for (method, fc) in &forecasts {
        let mut norms: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(scored.len())).collect();
        let mut weights = vec![(Vec::new(), Vec::new()); cfg.gammas.len()];
        for &t in &scored {
            let target = match &series.truth {
                Some(truth) => truth[t + 1].matrix(),
                None => series.observations[t + 1].matrix(),
            };
            let e = matrix_errors(&fc[t], target)?;
            for (acc, norm) in norms.iter_mut().zip(MatrixNorm::ALL) {
                acc.push(e.get(norm));
            }
            let mu = DVector::from_vec(series.mean_returns[t].clone());
            for (acc, &g) in weights.iter_mut().zip(&cfg.gammas) {
                let (l2, linf) =
                    weight_errors(&portfolio(g, &mu, &fc[t])?, &portfolio(g, &mu, target)?)?;
                acc.0.push(l2);
                acc.1.push(linf);
            }
        }
        let entry = |metric: &str, gamma, daily: Vec<f64>| ReportEntry {
            method: *method,
            metric: metric.to_string(),
            gamma,
            value: daily.iter().sum::<f64>() / daily.len() as f64,
            daily,
            interval: None,
        };
        for (daily, norm) in norms.into_iter().zip(MatrixNorm::ALL) {
            entries.push(entry(norm.name(), None, daily));
        }
        for ((l2, linf), &g) in weights.into_iter().zip(&cfg.gammas) {
            entries.push(entry("L2", Some(g), l2));
            entries.push(entry("LInf", Some(g), linf));
        }
    }
    Ok(MetricReport {
        entries,
        n_scored: scored.len(),
    })
}

/// Fills `interval` on every entry with a BCa interval of its daily values.
/// Entry `i` uses seed `seed + i`.
pub fn attach_intervals(
    report: &mut MetricReport,
    resamples: usize,
    alpha: f64,
    seed: u64,
) -> Result<()> {
    for (i, e) in report.entries.iter_mut().enumerate() {
        let ci = super::bootstrap::bca_bootstrap(
            &e.daily,
            resamples,
            alpha,
            seed.wrapping_add(i as u64),
        )?;
        e.interval = Some((ci.lower95, ci.upper95));
    }
    Ok(())
}
