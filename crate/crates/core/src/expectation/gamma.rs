//! The functionals `F` and `F_n` and a finite check of `min F = lim inf F_n`.

use crate::error::{GeoError, Result};
use crate::manifold::Manifold;

use super::ce::{intrinsic_ce, path_value_at};
use super::model::{DiscreteModel, ManifoldPath};

/// Trapezoid weights on the time grid (weight 1 for a single time).
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = times[i] - times[i - 1];
        w[i - 1] += 0.5 * h;
        w[i] += 0.5 * h;
    }
    w
}

fn check_shape<M: Manifold>(model: &DiscreteModel<M>, z: &ManifoldPath<M::Point>) -> Result<()> {
    if z.n_atoms() != model.n_atoms() || z.n_times() != model.n_times() || z.times != model.times()
    {
        return Err(GeoError::InvalidModel(
            "path does not live on the model grid".into(),
        ));
    }
    Ok(())
}

/// `∫ E[d^p(Z_t, X_t)] dt`.
pub fn gamma_f<M: Manifold>(
    model: &DiscreteModel<M>,
    z: &ManifoldPath<M::Point>,
    p: f64,
) -> Result<f64> {
    check_shape(model, z)?;
    let m = model.manifold();
    let w = trapezoid_weights(model.times());
    let mut total = 0.0;
    for (k, wk) in w.iter().enumerate() {
        for a in 0..model.n_atoms() {
            total += wk * model.probs()[a] * m.distance(z.at(a, k), model.point(a, k))?.powf(p);
        }
    }
    Ok(total)
}

/// `∫ E‖Log_{Z_{t-1/n}}(Z_t) − Log_{Z_{t-1/n}}(X_t)‖^p dt`, the lagged point
/// read off the extended, geodesically interpolated `Z`.
pub fn gamma_fn<M: Manifold>(
    model: &DiscreteModel<M>,
    z: &ManifoldPath<M::Point>,
    n: usize,
    p: f64,
) -> Result<f64> {
    check_shape(model, z)?;
    if n == 0 {
        return Err(GeoError::InvalidInput("n must be positive".into()));
    }
    let m = model.manifold();
    let h = 1.0 / n as f64;
    let w = trapezoid_weights(model.times());
    let mut total = 0.0;
    for (k, wk) in w.iter().enumerate() {
        let t = model.times()[k];
        for a in 0..model.n_atoms() {
            let lag = path_value_at(m, z, a, t - h)?;
            total +=
                wk * model.probs()[a] * lagged_gap(m, &lag, z.at(a, k), model.point(a, k))?.powf(p);
        }
    }
    Ok(total)
}

fn lagged_gap<M: Manifold>(m: &M, lag: &M::Point, z: &M::Point, x: &M::Point) -> Result<f64> {
    let lz = m.log(lag, z)?;
    let lx = m.log(lag, x)?;
    let diff: Vec<f64> = lz.iter().zip(&lx).map(|(a, b)| a - b).collect();
    m.tangent_norm(lag, &diff)
}

#[derive(Debug, Clone, Copy)]
pub struct GammaCheckOptions {
    /// Candidate values per cell: the cell mean plus the points at fractions
    /// `j/grid_levels`, `j = 1..=grid_levels`, of the geodesics from the mean
    /// to each distinct atom value.
    pub grid_levels: usize,
    /// Number of `n` values; the schedule doubles from the smallest power of
    /// two with `1/n` not exceeding the grid spacing.
    pub schedule_len: usize,
    pub p: f64,
}

impl Default for GammaCheckOptions {
    fn default() -> Self {
        GammaCheckOptions {
            grid_levels: 2,
            schedule_len: 11,
            p: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaReport {
    pub min_f: f64,
    /// `(n, inf F_n)` over the schedule.
    pub inf_fn: Vec<(usize, f64)>,
    pub terminal_gap: f64,
    pub terminal_rel_gap: f64,
    pub family_size_log10: f64,
}

struct Tree<P> {
    cand: Vec<Vec<Vec<P>>>,
}

fn build_tree<M: Manifold>(model: &DiscreteModel<M>, levels: usize) -> Result<Tree<M::Point>> {
    let m = model.manifold();
    let mut cand = Vec::with_capacity(model.n_times());
    for k in 0..model.n_times() {
        let means = intrinsic_ce(model, k, 1e-12)?;
        let mut per_cell = Vec::new();
        for (cell, mean) in model.partition(k).cells().iter().zip(means.values) {
            let mut pts = vec![mean.clone()];
            let mut seen: Vec<Vec<f64>> = Vec::new();
            for &a in cell {
                let x = model.point(a, k);
                let flat = m.flatten(x);
                if seen.contains(&flat) {
                    continue;
                }
                seen.push(flat);
                for j in 1..=levels {
                    pts.push(m.geodesic(&mean, x, j as f64 / levels as f64)?);
                }
            }
            per_cell.push(pts);
        }
        cand.push(per_cell);
    }
    Ok(Tree { cand })
}

/// Minimum over the candidate family of a functional whose time-`k` term
/// depends on the cell value at `k` and at `k-1`. `local(k, cell, u, v)`
/// receives the parent value `u` (ignored at `k = 0`).
fn tree_min<M: Manifold>(
    model: &DiscreteModel<M>,
    tree: &Tree<M::Point>,
    mut local: impl FnMut(usize, usize, Option<&M::Point>, &M::Point) -> Result<f64>,
) -> Result<f64> {
    let kk = model.n_times();
    // future[c][v]: optimal cost of all later times given value v in cell c
    let mut future: Vec<Vec<f64>> = tree.cand[kk - 1]
        .iter()
        .map(|c| vec![0.0; c.len()])
        .collect();
    for k in (1..kk).rev() {
        let parents = model.parent_cells(k);
        let mut best: Vec<Vec<f64>> = tree.cand[k - 1]
            .iter()
            .map(|c| vec![0.0; c.len()])
            .collect();
        for (c, &pc) in parents.iter().enumerate() {
            for (ui, u) in tree.cand[k - 1][pc].iter().enumerate() {
                let mut b = f64::INFINITY;
                for (vi, v) in tree.cand[k][c].iter().enumerate() {
                    b = b.min(local(k, c, Some(u), v)? + future[c][vi]);
                }
                best[pc][ui] += b;
            }
        }
        future = best;
    }
    let mut total = 0.0;
    for (c, pts) in tree.cand[0].iter().enumerate() {
        let mut b = f64::INFINITY;
        for (vi, v) in pts.iter().enumerate() {
            b = b.min(local(0, c, None, v)? + future[c][vi]);
        }
        total += b;
    }
    Ok(total)
}

/// Compares `min F` with `inf F_n` over the filtration-measurable paths whose
/// cell values come from a geodesic candidate grid, along a doubling `n`
/// schedule. Minimization is exact over the family (dynamic programming on
/// the partition tree).
pub fn gamma_limit_identity_check<M: Manifold>(
    model: &DiscreteModel<M>,
    opts: &GammaCheckOptions,
) -> Result<GammaReport> {
    let m = model.manifold();
    let p = opts.p;
    let tree = build_tree(model, opts.grid_levels.max(1))?;
    let w = trapezoid_weights(model.times());
    let probs = model.probs();
    let cells: Vec<&[Vec<usize>]> = (0..model.n_times())
        .map(|k| model.partition(k).cells())
        .collect();

    let min_f = tree_min(model, &tree, |k, c, _u, v| {
        let mut s = 0.0;
        for &a in &cells[k][c] {
            s += probs[a] * m.distance(v, model.point(a, k))?.powf(p);
        }
        Ok(w[k] * s)
    })?;

    let min_dt = model
        .times()
        .windows(2)
        .map(|t| t[1] - t[0])
        .fold(f64::INFINITY, f64::min);
    let mut n = 1usize;
    while min_dt.is_finite() && (1.0 / n as f64) > min_dt {
        n *= 2;
    }
    let mut inf_fn = Vec::with_capacity(opts.schedule_len);
    for _ in 0..opts.schedule_len.max(1) {
        let h = 1.0 / n as f64;
        let val = tree_min(model, &tree, |k, c, u, v| {
            let mut s = 0.0;
            match u {
                None => {
                    for &a in &cells[k][c] {
                        s += probs[a] * m.distance(v, model.point(a, k))?.powf(p);
                    }
                }
                Some(u) => {
                    let dt = model.times()[k] - model.times()[k - 1];
                    let lag = m.geodesic(u, v, 1.0 - h / dt)?;
                    for &a in &cells[k][c] {
                        s += probs[a] * lagged_gap(m, &lag, v, model.point(a, k))?.powf(p);
                    }
                }
            }
            Ok(w[k] * s)
        })?;
        inf_fn.push((n, val));
        n *= 2;
    }
    let last = inf_fn.last().map(|x| x.1).unwrap_or(f64::NAN);
    let terminal_gap = (last - min_f).abs();
    let scale = min_f.abs().max(last.abs());
    let terminal_rel_gap = if scale > 0.0 {
        terminal_gap / scale
    } else {
        0.0
    };
    let family_size_log10 = tree
        .cand
        .iter()
        .flatten()
        .map(|c| (c.len() as f64).log10())
        .sum();
    Ok(GammaReport {
        min_f,
        inf_fn,
        terminal_gap,
        terminal_rel_gap,
        family_size_log10,
    })
}
