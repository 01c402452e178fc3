//! Euler discretization of the asymptotic filter SDE.
//!
//! Per step, in the chart at the running estimate `X^g`:
//!
//! ```text
//! dm_i = G_i dỸ_i,                    G_i = P_i H_i / K_i²
//! dP_i = (2 A_i P_i + C_i² − P_i² H_i² / K_i²) du
//! dX   = Σ_i ∂_i Exp(0) dm_i + ½ Σ_{i,j} ∂²_{ij} Exp(0) Ξ^{ij} du
//! Ξ^{ij} = (H_i P_i / K_i)(H_j P_j / K_j)
//! ```
//!
//! The derivatives of `v ↦ Exp_{X^g}(v)` are central differences with step
//! `1e-4·(1 + ‖X^g‖_F)`. The new point is formed in flattened ambient
//! coordinates.

use super::nkf::{fd_step, FilterState};
use super::params::SsmParams;
use crate::error::{GeoError, Result};
use crate::manifold::Manifold;

struct ExpJet {
    grad: Vec<Vec<f64>>,
    hess: Vec<Vec<Vec<f64>>>,
    base: Vec<f64>,
}

fn exp_jet<M: Manifold>(m: &M, anchor: &M::Point) -> Result<ExpJet> {
    let d = m.coord_dim();
    let h = fd_step(m, anchor);
    let eval = |shifts: &[(usize, f64)]| -> Result<Vec<f64>> {
        let mut v = vec![0.0; d];
        for &(i, s) in shifts {
            v[i] += s;
        }
        Ok(m.flatten(&m.exp(anchor, &v)?))
    };
    let base = m.flatten(anchor);
    let n = base.len();
    let mut grad = Vec::with_capacity(d);
    let mut plus = Vec::with_capacity(d);
    let mut minus = Vec::with_capacity(d);
    for i in 0..d {
        let p = eval(&[(i, h)])?;
        let q = eval(&[(i, -h)])?;
        grad.push((0..n).map(|r| (p[r] - q[r]) / (2.0 * h)).collect());
        plus.push(p);
        minus.push(q);
    }
    let mut hess = vec![vec![vec![0.0; n]; d]; d];
    for i in 0..d {
        hess[i][i] = (0..n)
            .map(|r| (plus[i][r] - 2.0 * base[r] + minus[i][r]) / (h * h))
            .collect();
        for j in (i + 1)..d {
            let pp = eval(&[(i, h), (j, h)])?;
            let pm = eval(&[(i, h), (j, -h)])?;
            let mp = eval(&[(i, -h), (j, h)])?;
            let mm = eval(&[(i, -h), (j, -h)])?;
            let hij: Vec<f64> = (0..n)
                .map(|r| (pp[r] - pm[r] - mp[r] + mm[r]) / (4.0 * h * h))
                .collect();
            hess[i][j] = hij.clone();
            hess[j][i] = hij;
        }
    }
    Ok(ExpJet { grad, hess, base })
}

/// Runs the Euler scheme over `observations`, re-anchoring at every step.
pub fn sde_filter_euler<M: Manifold>(
    m: &M,
    init: FilterState<M::Point>,
    observations: &[M::Point],
    params: &SsmParams,
) -> Result<Vec<M::Point>> {
    init.validate()?;
    params.validate()?;
    params.check_dim(init.p.len())?;
    if params.coords.iter().any(|c| !(c.k > 0.0)) {
        return Err(GeoError::InvalidInput(
            "observation noise must be positive".into(),
        ));
    }
    let dt = params.dt;
    let mut anchor = init.anchor;
    let mut p = init.p;
    let mut out = Vec::with_capacity(observations.len());
    for y in observations {
        let dy = m.log(&anchor, y)?;
        let jet = exp_jet(m, &anchor)?;
        let d = p.len();
        let gains: Vec<f64> = (0..d)
            .map(|i| {
                let c = &params.coords[i];
                p[i] * c.h / (c.k * c.k)
            })
            .collect();
        let xi_root: Vec<f64> = (0..d)
            .map(|i| {
                let c = &params.coords[i];
                c.h * p[i] / c.k
            })
            .collect();
        let mut x = jet.base;
        for i in 0..d {
            let dm = gains[i] * dy[i];
            for (xr, g) in x.iter_mut().zip(&jet.grad[i]) {
                *xr += g * dm;
            }
            for j in 0..d {
                let w = 0.5 * xi_root[i] * xi_root[j] * dt;
                for (xr, hr) in x.iter_mut().zip(&jet.hess[i][j]) {
                    *xr += hr * w;
                }
            }
        }
        for (i, pi) in p.iter_mut().enumerate() {
            let c = &params.coords[i];
            let drift = 2.0 * c.a * *pi + c.c * c.c - *pi * *pi * c.h * c.h / (c.k * c.k);
            *pi = (*pi + drift * dt).max(0.0);
        }
        anchor = m.unflatten(&x)?;
        out.push(anchor.clone());
    }
    Ok(out)
}
