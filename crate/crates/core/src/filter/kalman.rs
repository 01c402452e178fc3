//! Scalar Kalman recursion applied coordinate by coordinate.
//!
//! Observations are increments `ỹ = H X Δt + K √Δt ε`; the update uses
//! `z = ỹ/Δt` with noise variance `K²/Δt`.

use super::params::{CoordParams, SsmParams};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarState {
    pub m: f64,
    pub p: f64,
}

/// Predict and update output, with the innovation and its variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarStep {
    pub state: ScalarState,
    pub innovation: f64,
    pub innovation_var: f64,
    pub gain: f64,
}

pub fn scalar_predict(s: ScalarState, c: &CoordParams, dt: f64) -> ScalarState {
    let f = 1.0 + c.a * dt;
    ScalarState {
        m: f * s.m,
        p: f * f * s.p + c.c * c.c * dt,
    }
}

pub fn scalar_update(pred: ScalarState, y: f64, c: &CoordParams, dt: f64) -> ScalarStep {
    let z = y / dt;
    let r = c.k * c.k / dt;
    let s = c.h * c.h * pred.p + r;
    let innovation = z - c.h * pred.m;
    if !(s > 0.0) {
        return ScalarStep {
            state: pred,
            innovation,
            innovation_var: s,
            gain: 0.0,
        };
    }
    let g = pred.p * c.h / s;
    ScalarStep {
        state: ScalarState {
            m: pred.m + g * innovation,
            p: ((1.0 - g * c.h) * pred.p).max(0.0),
        },
        innovation,
        innovation_var: s,
        gain: g,
    }
}

pub fn scalar_kalman_step(s: ScalarState, y: f64, c: &CoordParams, dt: f64) -> ScalarStep {
    scalar_update(scalar_predict(s, c, dt), y, c, dt)
}

/// Per-coordinate predict and update of `(m, P)` with increment observation `y`.
pub fn kalman_step(
    m: &[f64],
    p: &[f64],
    y: &[f64],
    params: &SsmParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.check_dim(m.len())?;
    params.check_dim(p.len())?;
    params.check_dim(y.len())?;
    let mut m_out = Vec::with_capacity(m.len());
    let mut p_out = Vec::with_capacity(m.len());
    for i in 0..m.len() {
        let st = scalar_kalman_step(
            ScalarState { m: m[i], p: p[i] },
            y[i],
            &params.coords[i],
            params.dt,
        );
        m_out.push(st.state.m);
        p_out.push(st.state.p);
    }
    Ok((m_out, p_out))
}

/// Steady-state posterior variance of the time-invariant scalar filter:
/// the positive root of the prior Riccati equation
/// `H²Π² + (R(1−f²) − qH²)Π − qR = 0`, mapped through the update.
pub fn riccati_steady_state(c: &CoordParams, dt: f64) -> f64 {
    let f = 1.0 + c.a * dt;
    let q = c.c * c.c * dt;
    let r = c.k * c.k / dt;
    let h2 = c.h * c.h;
    let b = r * (1.0 - f * f) - q * h2;
    let disc = (b * b + 4.0 * h2 * q * r).sqrt();
    // stable form of the positive root
    let prior = if b <= 0.0 {
        (disc - b) / (2.0 * h2)
    } else {
        2.0 * q * r / (disc + b)
    };
    prior * r / (h2 * prior + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uninformative_observation_is_pure_prediction() {
        let c = CoordParams::new(-0.3, 0.5, 1.0, 1e12).unwrap();
        let st = scalar_kalman_step(ScalarState { m: 2.0, p: 0.4 }, 100.0, &c, 0.5);
        let pred = scalar_predict(ScalarState { m: 2.0, p: 0.4 }, &c, 0.5);
        assert!((st.state.m - pred.m).abs() < 1e-9);
        assert!((st.state.p - pred.p).abs() < 1e-9);
    }

    #[test]
    fn perfect_observation_snaps_to_level() {
        let c = CoordParams::new(0.0, 0.0, 1.0, 0.0).unwrap();
        let st = scalar_kalman_step(ScalarState { m: 0.0, p: 1.0 }, 3.0, &c, 1.0);
        assert!((st.state.m - 3.0).abs() < 1e-15);
        assert_eq!(st.state.p, 0.0);
    }
}
