//! Maximum likelihood for the per-coordinate scalar model, `H = 1`.

use rayon::prelude::*;

use super::kalman::{scalar_kalman_step, ScalarState};
use super::params::{CoordParams, SsmParams};
use crate::error::{GeoError, Result};

const MIN_OBS: usize = 30;
const F_MIN: f64 = -0.999;
const F_MAX: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MleFit {
    pub params: SsmParams,
    /// Maximized log-likelihood per coordinate.
    pub loglik: Vec<f64>,
    /// Log-likelihood at the moment-based starting point.
    pub init_loglik: Vec<f64>,
}

/// Innovations log-likelihood of one increment series.
pub fn scalar_loglik(y: &[f64], c: &CoordParams, dt: f64) -> f64 {
    let f = 1.0 + c.a * dt;
    let q = c.c * c.c * dt;
    let p0 = if f.abs() < 1.0 {
        q / (1.0 - f * f)
    } else {
        let z: Vec<f64> = y.iter().map(|v| v / dt).collect();
        sample_var(&z)
    };
    // start one step before the first observation
    let mut st = ScalarState { m: 0.0, p: p0 };
    let mut ll = 0.0;
    for &yk in y {
        let step = scalar_kalman_step(st, yk, c, dt);
        let s = step.innovation_var;
        if !(s > 0.0) || !s.is_finite() {
            return f64::NEG_INFINITY;
        }
        ll -= 0.5 * ((2.0 * std::f64::consts::PI * s).ln() + step.innovation * step.innovation / s);
        st = step.state;
    }
    ll
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

fn autocov(x: &[f64], lag: usize) -> f64 {
    let m = mean(x);
    let n = x.len();
    (lag..n).map(|i| (x[i] - m) * (x[i - lag] - m)).sum::<f64>() / n as f64
}

/// Lag-1 and lag-2 autocovariances give the AR coefficient and the signal
/// variance; the remainder of the variance is observation noise.
pub fn moment_init(y: &[f64], dt: f64) -> CoordParams {
    let z: Vec<f64> = y.iter().map(|v| v / dt).collect();
    let g0 = sample_var(&z);
    let g1 = autocov(&z, 1);
    let g2 = autocov(&z, 2);
    let (f, var_x) = if g1 > 0.05 * g0 {
        let f = (g2 / g1).clamp(0.05, 0.99);
        (f, (g1 / f).min(0.95 * g0))
    } else {
        (0.0, 0.5 * g0)
    };
    let r = (g0 - var_x).max(0.05 * g0);
    CoordParams {
        a: (f - 1.0) / dt,
        c: (var_x * (1.0 - f * f) / dt).sqrt(),
        h: 1.0,
        k: (r * dt).sqrt(),
    }
}

fn to_params(theta: &[f64; 3], dt: f64) -> CoordParams {
    CoordParams {
        a: theta[0],
        c: theta[1].exp(),
        h: 1.0,
        k: theta[2].exp(),
    }
    .clamped(dt)
}

impl CoordParams {
    fn clamped(mut self, dt: f64) -> Self {
        let f = (1.0 + self.a * dt).clamp(F_MIN, F_MAX);
        self.a = (f - 1.0) / dt;
        self
    }
}

fn fit_one(y: &[f64], dt: f64) -> Result<(CoordParams, f64, f64)> {
    if y.len() < MIN_OBS {
        return Err(GeoError::InvalidInput(format!(
            "need at least {MIN_OBS} observations, got {}",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(GeoError::InvalidInput("non-finite observation".into()));
    }
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if sample_var(y).sqrt() <= 1e-14 * (1.0 + scale) {
        return Err(GeoError::DegenerateData(
            "constant observation series".into(),
        ));
    }
    let init = moment_init(y, dt);
    let mut theta = [init.a, init.c.max(1e-300).ln(), init.k.max(1e-300).ln()];
    let init_ll = scalar_loglik(y, &to_params(&theta, dt), dt);
    let mut best = init_ll;
    let mut steps = [0.25 / dt, 0.5, 0.5];
    let min_step = [1e-7 / dt, 1e-7, 1e-7];
    for _ in 0..5000 {
        let mut improved = false;
        for i in 0..3 {
            for sign in [1.0, -1.0] {
                let mut cand = theta;
                cand[i] += sign * steps[i];
                let p = to_params(&cand, dt);
                cand[0] = p.a;
                let ll = scalar_loglik(y, &p, dt);
                if ll > best {
                    best = ll;
                    theta = cand;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            for (s, lo) in steps.iter_mut().zip(min_step) {
                *s *= 0.5;
                if *s < lo {
                    *s = lo;
                }
            }
            if steps.iter().zip(min_step).all(|(s, lo)| *s <= lo) {
                break;
            }
        }
    }
    Ok((to_params(&theta, dt), best, init_ll))
}

/// Fits `(A, C, K)` per coordinate by derivative-free coordinate search on
/// the innovations likelihood, `H` fixed to 1. `obs[k]` is the increment
/// vector at step `k`.
pub fn mle_fit(obs: &[Vec<f64>], dt: f64) -> Result<MleFit> {
    if !(dt > 0.0) {
        return Err(GeoError::InvalidInput("time step must be positive".into()));
    }
    let d = obs.first().map(|o| o.len()).unwrap_or(0);
    if d == 0 {
        return Err(GeoError::InvalidInput("no observations".into()));
    }
    if obs.iter().any(|o| o.len() != d) {
        return Err(GeoError::InvalidInput("ragged observation vectors".into()));
    }
    let fits: Vec<Result<(CoordParams, f64, f64)>> = (0..d)
        .into_par_iter()
        .map(|i| {
            let series: Vec<f64> = obs.iter().map(|o| o[i]).collect();
            fit_one(&series, dt)
        })
        .collect();
    let mut coords = Vec::with_capacity(d);
    let mut loglik = Vec::with_capacity(d);
    let mut init_loglik = Vec::with_capacity(d);
    for f in fits {
        let (c, ll, ll0) = f?;
        coords.push(c);
        loglik.push(ll);
        init_loglik.push(ll0);
    }
    Ok(MleFit {
        params: SsmParams::new(coords, dt)?,
        loglik,
        init_loglik,
    })
}

/// Lag-1 autocorrelation of the observations implied by fitted parameters.
pub fn implied_lag1_autocorr(c: &CoordParams, dt: f64) -> f64 {
    let f = 1.0 + c.a * dt;
    if f.abs() >= 1.0 {
        return 1.0;
    }
    let var_x = c.c * c.c * dt / (1.0 - f * f);
    let r = c.k * c.k / dt;
    c.h * c.h * f * var_x / (c.h * c.h * var_x + r)
}
