//! Euler–Maruyama simulation of the tangent-coordinate state-space model.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::params::SsmParams;
use crate::error::{GeoError, Result};
use crate::manifold::Manifold;

#[derive(Debug, Clone)]
pub struct SimOutput<P> {
    /// `k Δt` for `k = 0..=T`.
    pub times: Vec<f64>,
    /// `T + 1` latent points, starting at `x0`.
    pub latent: Vec<P>,
    /// `T` observations, `observed[k-1]` taken at `times[k]`.
    pub observed: Vec<P>,
    /// Tangent coordinates `X̃_k`, `T + 1` rows.
    pub latent_coords: Vec<Vec<f64>>,
    /// Observation increments `ỹ_k`, `T` rows.
    pub obs_coords: Vec<Vec<f64>>,
}

/// [`simulate_ssm_from`] with zero initial coordinates.
pub fn simulate_ssm<M: Manifold>(
    m: &M,
    params: &SsmParams,
    x0: &M::Point,
    steps: usize,
    seed: u64,
) -> Result<SimOutput<M::Point>> {
    simulate_ssm_from(m, params, x0, &vec![0.0; params.dim()], steps, seed)
}

/// Per step:
///
/// ```text
/// X̃_k = (1 + AΔt) X̃_{k-1} + C √Δt ξ_k
/// ỹ_k = H X̃_k Δt + K √Δt ε_k
/// X_k = Exp_{X_{k-1}}(X̃_k),  Y_k = Exp_{X_{k-1}}(ỹ_k)
/// ```
///
/// The chart moves to the new latent point each step while the coordinates
/// carry over. Normals are drawn latent-first then observation, coordinate
/// order, from a ChaCha8 stream.
pub fn simulate_ssm_from<M: Manifold>(
    m: &M,
    params: &SsmParams,
    x0: &M::Point,
    init_coords: &[f64],
    steps: usize,
    seed: u64,
) -> Result<SimOutput<M::Point>> {
    params.validate()?;
    params.check_dim(m.coord_dim())?;
    params.check_dim(init_coords.len())?;
    let dt = params.dt;
    let sq = dt.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SimOutput {
        times: (0..=steps).map(|k| k as f64 * dt).collect(),
        latent: vec![x0.clone()],
        observed: Vec::with_capacity(steps),
        latent_coords: vec![init_coords.to_vec()],
        obs_coords: Vec::with_capacity(steps),
    };
    let d = params.dim();
    for _ in 0..steps {
        let prev = out.latent_coords.last().expect("nonempty");
        let xi: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let eps: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut x = Vec::with_capacity(d);
        let mut y = Vec::with_capacity(d);
        for (i, c) in params.coords.iter().enumerate() {
            let xi_i = (1.0 + c.a * dt) * prev[i] + c.c * sq * xi[i];
            x.push(xi_i);
            y.push(c.h * xi_i * dt + c.k * sq * eps[i]);
        }
        let anchor = out.latent.last().expect("nonempty");
        let xk = m.exp(anchor, &x)?;
        let yk = m.exp(anchor, &y)?;
        out.latent.push(xk);
        out.observed.push(yk);
        out.latent_coords.push(x);
        out.obs_coords.push(y);
    }
    Ok(out)
}

/// Long-format CSV: `time,series,e0,e1,…`, flattened points.
pub fn write_long_csv<W: Write, M: Manifold>(
    w: W,
    m: &M,
    series: &[(&str, &[f64], &[M::Point])],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let width = m.flat_len();
    let mut header = vec!["time".to_string(), "series".to_string()];
    header.extend((0..width).map(|i| format!("e{i}")));
    wtr.write_record(&header)?;
    for (name, times, pts) in series {
        if times.len() != pts.len() {
            return Err(GeoError::DimensionMismatch {
                expected: times.len(),
                got: pts.len(),
            });
        }
        for (t, p) in times.iter().zip(pts.iter()) {
            let mut rec = vec![format!("{t}"), name.to_string()];
            rec.extend(m.flatten(p).iter().map(|x| format!("{x:e}")));
            wtr.write_record(&rec)?;
        }
    }
    wtr.flush()?;
    Ok(())
}
