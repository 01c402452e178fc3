//! A small Riemannian-manifold abstraction shared by the estimators.
//!
//! Tangent vectors are plain coordinate vectors. For the SPD cone the
//! coordinates are the half-vectorization of the symmetric tangent matrix.

use std::fmt::Debug;

use crate::error::{GeoError, Result};
use crate::sym::{sym_from_vech, vech_len, SymMatrix, VechVector};

pub trait Manifold {
    type Point: Clone + Debug;

    /// Number of tangent coordinates.
    fn coord_dim(&self) -> usize;

    fn log(&self, base: &Self::Point, target: &Self::Point) -> Result<Vec<f64>>;

    fn exp(&self, base: &Self::Point, v: &[f64]) -> Result<Self::Point>;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Result<f64>;

    /// Length of `v` in the Riemannian metric at `base`.
    fn tangent_norm(&self, base: &Self::Point, v: &[f64]) -> Result<f64>;

    /// Frobenius/Euclidean norm of `v` as an ambient object, independent of base.
    fn ambient_norm(&self, v: &[f64]) -> f64;

    fn flatten(&self, p: &Self::Point) -> Vec<f64>;

    fn unflatten(&self, data: &[f64]) -> Result<Self::Point>;

    /// Length of the flattened representation.
    fn flat_len(&self) -> usize;

    /// `Exp_a(t · Log_a(b))`.
    fn geodesic(&self, a: &Self::Point, b: &Self::Point, t: f64) -> Result<Self::Point> {
        let v = self.log(a, b)?;
        let scaled: Vec<f64> = v.iter().map(|x| x * t).collect();
        self.exp(a, &scaled)
    }
}

/// The SPD cone of D×D matrices with the affine-invariant metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpdManifold {
    dim: usize,
}

impl SpdManifold {
    pub fn new(dim: usize) -> Self {
        SpdManifold { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tangent_matrix(&self, v: &[f64]) -> Result<SymMatrix> {
        Ok(sym_from_vech(&VechVector::new(self.dim, v.to_vec())?))
    }
}

/// Flat ℝ^d: Exp and Log are addition and subtraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EuclideanSpace {
    dim: usize,
}

impl EuclideanSpace {
    pub fn new(dim: usize) -> Self {
        EuclideanSpace { dim }
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(GeoError::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }
}

impl Manifold for EuclideanSpace {
    type Point = Vec<f64>;

    fn coord_dim(&self) -> usize {
        self.dim
    }

    fn log(&self, base: &Vec<f64>, target: &Vec<f64>) -> Result<Vec<f64>> {
        self.check(base.len())?;
        self.check(target.len())?;
        Ok(target.iter().zip(base).map(|(t, b)| t - b).collect())
    }

    fn exp(&self, base: &Vec<f64>, v: &[f64]) -> Result<Vec<f64>> {
        self.check(base.len())?;
        self.check(v.len())?;
        Ok(base.iter().zip(v).map(|(b, x)| b + x).collect())
    }

    fn distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> Result<f64> {
        Ok(euclid_norm(&self.log(a, b)?))
    }

    fn tangent_norm(&self, _base: &Vec<f64>, v: &[f64]) -> Result<f64> {
        self.check(v.len())?;
        Ok(euclid_norm(v))
    }

    fn ambient_norm(&self, v: &[f64]) -> f64 {
        euclid_norm(v)
    }

    fn flatten(&self, p: &Vec<f64>) -> Vec<f64> {
        p.clone()
    }

    fn unflatten(&self, data: &[f64]) -> Result<Vec<f64>> {
        self.check(data.len())?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(GeoError::InvalidInput("non-finite coordinate".into()));
        }
        Ok(data.to_vec())
    }

    fn flat_len(&self) -> usize {
        self.dim
    }
}

pub(crate) fn euclid_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The flat geometry matching the SPD tangent coordinates: raw vech entries.
pub fn flat_counterpart(spd: &SpdManifold) -> EuclideanSpace {
    EuclideanSpace::new(vech_len(spd.dim()))
}

#[derive(Debug, Clone, Copy)]
pub struct BarycenterOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl BarycenterOptions {
    /// `tol = 1e-10·(1 + mean pairwise distance)`, `max_iter = 200`.
    pub fn scaled_default<M: Manifold>(m: &M, points: &[M::Point]) -> Result<Self> {
        let mut total = 0.0;
        let mut count = 0usize;
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                total += m.distance(&points[i], &points[j])?;
                count += 1;
            }
        }
        let mean = if count == 0 {
            0.0
        } else {
            total / count as f64
        };
        Ok(BarycenterOptions {
            tol: 1e-10 * (1.0 + mean),
            max_iter: 200,
        })
    }
}

impl Default for BarycenterOptions {
    fn default() -> Self {
        BarycenterOptions {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

fn weighted_tangent_mean<M: Manifold>(
    m: &M,
    x: &M::Point,
    points: &[M::Point],
    weights: &[f64],
) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; m.coord_dim()];
    for (p, &w) in points.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (a, l) in acc.iter_mut().zip(m.log(x, p)?) {
            *a += w * l;
        }
    }
    Ok(acc)
}

fn frechet_objective<M: Manifold>(
    m: &M,
    x: &M::Point,
    points: &[M::Point],
    weights: &[f64],
) -> Result<f64> {
    let mut f = 0.0;
    for (p, &w) in points.iter().zip(weights) {
        if w > 0.0 {
            f += w * m.distance(x, p)?.powi(2);
        }
    }
    Ok(f)
}

/// Weighted Fréchet mean by the damped fixed-point map
/// `x ← Exp_x(s · Σ wⱼ Log_x(Yⱼ))`, unit step halved whenever the objective
/// fails to decrease. Starts at `init` or at the heaviest point.
pub fn karcher_mean<M: Manifold>(
    m: &M,
    points: &[M::Point],
    weights: &[f64],
    opts: &BarycenterOptions,
    init: Option<&M::Point>,
) -> Result<M::Point> {
    if points.is_empty() {
        return Err(GeoError::InvalidInput("empty point cloud".into()));
    }
    if points.len() != weights.len() {
        return Err(GeoError::DimensionMismatch {
            expected: points.len(),
            got: weights.len(),
        });
    }
    if !(opts.tol > 0.0) {
        return Err(GeoError::InvalidInput("tolerance must be positive".into()));
    }
    let mut x = match init {
        Some(p) => p.clone(),
        None => {
            let heaviest = weights
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            points[heaviest].clone()
        }
    };
    let mut f = frechet_objective(m, &x, points, weights)?;
    let mut step = 1.0;
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let g = weighted_tangent_mean(m, &x, points, weights)?;
        residual = m.ambient_norm(&g);
        if residual < opts.tol {
            return Ok(x);
        }
        loop {
            let v: Vec<f64> = g.iter().map(|gi| gi * step).collect();
            let cand = m.exp(&x, &v)?;
            let f_new = frechet_objective(m, &cand, points, weights)?;
            if f_new <= f + 1e-14 * (1.0 + f) || step < 1e-6 {
                x = cand;
                f = f_new;
                break;
            }
            step *= 0.5;
        }
    }
    let g = weighted_tangent_mean(m, &x, points, weights)?;
    let last_residual = m.ambient_norm(&g);
    if last_residual < opts.tol {
        return Ok(x);
    }
    residual = residual.min(last_residual);
    Err(GeoError::MaxIterExceeded {
        iterations: opts.max_iter,
        residual,
        last: m.flatten(&x),
    })
}
