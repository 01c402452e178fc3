//! The non-Euclidean Kalman filter and its fixed-chart baselines.

use super::kalman::kalman_step;
use super::params::SsmParams;
use crate::error::{GeoError, Result};
use crate::manifold::Manifold;

/// How the coordinate variances follow the chart when the anchor moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CarryMode {
    /// Keep `P` unchanged.
    #[default]
    Keep,
    /// Push `diag(P)` through the chart-change Jacobian (central differences)
    /// and keep the diagonal.
    Whitened,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterState<P> {
    /// Base point of the current chart.
    pub anchor: P,
    /// Tangent-coordinate state mean at `anchor`.
    pub m: Vec<f64>,
    /// Per-coordinate state variances.
    pub p: Vec<f64>,
}

impl<P: Clone> FilterState<P> {
    pub fn new(anchor: P, p0: Vec<f64>) -> Self {
        let d = p0.len();
        FilterState {
            anchor,
            m: vec![0.0; d],
            p: p0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.len() != self.p.len() {
            return Err(GeoError::DimensionMismatch {
                expected: self.p.len(),
                got: self.m.len(),
            });
        }
        if self.p.iter().any(|&x| !(x >= 0.0)) {
            return Err(GeoError::InvalidInput(
                "state variances must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn fd_step<M: Manifold>(m: &M, anchor: &M::Point) -> f64 {
    let frob = m.flatten(anchor).iter().map(|x| x * x).sum::<f64>().sqrt();
    1e-4 * (1.0 + frob)
}

fn whitened_carry<M: Manifold>(
    m: &M,
    old: &M::Point,
    new: &M::Point,
    at: &[f64],
    p: &[f64],
) -> Result<Vec<f64>> {
    let h = fd_step(m, old);
    let d = p.len();
    let mut out = vec![0.0; d];
    for j in 0..d {
        let mut plus = at.to_vec();
        let mut minus = at.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let fp = m.log(new, &m.exp(old, &plus)?)?;
        let fm = m.log(new, &m.exp(old, &minus)?)?;
        for i in 0..d {
            let jij = (fp[i] - fm[i]) / (2.0 * h);
            out[i] += jij * jij * p[j];
        }
    }
    Ok(out)
}

/// One filter step: read the observation in the current chart, run the
/// per-coordinate Kalman update, map the mean back with `Exp`, and move the
/// chart to the new estimate with zero coordinates.
pub fn nkf_step<M: Manifold>(
    m: &M,
    fs: &FilterState<M::Point>,
    y: &M::Point,
    params: &SsmParams,
    carry: CarryMode,
) -> Result<(FilterState<M::Point>, M::Point)> {
    fs.validate()?;
    let yt = m.log(&fs.anchor, y)?;
    let (mean, var) = kalman_step(&fs.m, &fs.p, &yt, params)?;
    let est = m.exp(&fs.anchor, &mean)?;
    let p = match carry {
        CarryMode::Keep => var,
        CarryMode::Whitened => whitened_carry(m, &fs.anchor, &est, &mean, &var)?,
    };
    let next = FilterState {
        anchor: est.clone(),
        m: vec![0.0; mean.len()],
        p,
    };
    Ok((next, est))
}

/// Filtered estimates and one-step-ahead forecasts, aligned with the
/// observations: `forecasts[k]` uses observations up to `k`.
#[derive(Debug, Clone)]
pub struct FilterRun<P> {
    pub estimates: Vec<P>,
    pub forecasts: Vec<P>,
}

/// Runs [`nkf_step`] over a sequence starting from `init`.
pub fn run_nkf<M: Manifold>(
    m: &M,
    init: FilterState<M::Point>,
    observations: &[M::Point],
    params: &SsmParams,
    carry: CarryMode,
) -> Result<FilterRun<M::Point>> {
    let mut fs = init;
    let mut estimates = Vec::with_capacity(observations.len());
    let mut forecasts = Vec::with_capacity(observations.len());
    for y in observations {
        let (next, est) = nkf_step(m, &fs, y, params, carry)?;
        // coordinates are zero after re-anchoring, so the prediction is the anchor
        forecasts.push(next.anchor.clone());
        estimates.push(est);
        fs = next;
    }
    Ok(FilterRun {
        estimates,
        forecasts,
    })
}

/// The same per-coordinate pipeline with the `Log`/`Exp` base held at
/// `anchor` for the whole run.
pub fn fixed_anchor_filter<M: Manifold>(
    m: &M,
    anchor: &M::Point,
    p0: &[f64],
    observations: &[M::Point],
    params: &SsmParams,
) -> Result<FilterRun<M::Point>> {
    params.check_dim(p0.len())?;
    let mut mean = vec![0.0; p0.len()];
    let mut var = p0.to_vec();
    let mut estimates = Vec::with_capacity(observations.len());
    let mut forecasts = Vec::with_capacity(observations.len());
    for y in observations {
        let yt = m.log(anchor, y)?;
        let (mn, vr) = kalman_step(&mean, &var, &yt, params)?;
        mean = mn;
        var = vr;
        estimates.push(m.exp(anchor, &mean)?);
        let ahead: Vec<f64> = mean
            .iter()
            .zip(&params.coords)
            .map(|(x, c)| (1.0 + c.a * params.dt) * x)
            .collect();
        forecasts.push(m.exp(anchor, &ahead)?);
    }
    Ok(FilterRun {
        estimates,
        forecasts,
    })
}
