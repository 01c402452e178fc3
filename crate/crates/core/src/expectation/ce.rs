//! Geodesic and intrinsic conditional expectations on finite models.

use crate::error::{GeoError, Result};
use crate::manifold::{karcher_mean, BarycenterOptions, Manifold};

use super::model::{DiscreteModel, ManifoldPath};

/// One value per cell of the partition at time index `time_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellValues<P> {
    pub time_index: usize,
    pub values: Vec<P>,
}

/// Evaluates a grid path at an arbitrary time: frozen before the first and
/// after the last grid time, geodesic between neighbouring grid points.
pub fn path_value_at<M: Manifold>(
    m: &M,
    path: &ManifoldPath<M::Point>,
    atom: usize,
    s: f64,
) -> Result<M::Point> {
    let times = &path.times;
    let row = &path.values[atom];
    if s <= times[0] {
        return Ok(row[0].clone());
    }
    let last = times.len() - 1;
    if s >= times[last] {
        return Ok(row[last].clone());
    }
    // first index with times[i] > s
    let i = times.partition_point(|&t| t <= s);
    let (t0, t1) = (times[i - 1], times[i]);
    if s == t0 {
        return Ok(row[i - 1].clone());
    }
    m.geodesic(&row[i - 1], &row[i], (s - t0) / (t1 - t0))
}

/// Freezes the path at its value at `t_freeze` for all times at or after it.
/// Times before the grid already carry the initial value. A freeze time
/// strictly between two grid points is inserted into the grid so that the
/// extended path keeps its kink there.
pub fn horizontal_extend<M: Manifold>(
    m: &M,
    path: &ManifoldPath<M::Point>,
    t_freeze: f64,
) -> Result<ManifoldPath<M::Point>> {
    let times = &path.times;
    let insert =
        t_freeze > times[0] && t_freeze < times[times.len() - 1] && !times.contains(&t_freeze);
    let mut out_times = Vec::with_capacity(times.len() + 1);
    for &t in times {
        if insert && t > t_freeze && out_times.last().is_none_or(|&l: &f64| l < t_freeze) {
            out_times.push(t_freeze);
        }
        out_times.push(t);
    }
    let mut values = Vec::with_capacity(path.n_atoms());
    for atom in 0..path.n_atoms() {
        let frozen = path_value_at(m, path, atom, t_freeze)?;
        let mut row = Vec::with_capacity(out_times.len());
        let mut src = 0;
        for &t in &out_times {
            if t >= t_freeze {
                row.push(frozen.clone());
            } else {
                row.push(path.values[atom][src].clone());
            }
            if times.get(src) == Some(&t) {
                src += 1;
            }
        }
        values.push(row);
    }
    Ok(ManifoldPath {
        times: out_times,
        values,
    })
}

fn cell_weights<M: Manifold>(model: &DiscreteModel<M>, cell: &[usize]) -> Result<(Vec<f64>, f64)> {
    if cell.is_empty() {
        return Err(GeoError::InvalidModel("empty cell".into()));
    }
    let w: Vec<f64> = cell.iter().map(|&a| model.probs()[a]).collect();
    let total = w.iter().sum();
    Ok((w, total))
}

/// Probability-weighted Fréchet mean of the time-0 points.
pub fn frechet_initial<M: Manifold>(model: &DiscreteModel<M>) -> Result<M::Point> {
    let pts: Vec<M::Point> = (0..model.n_atoms())
        .map(|a| model.point(a, 0).clone())
        .collect();
    let opts = BarycenterOptions::scaled_default(model.manifold(), &pts)?;
    karcher_mean(model.manifold(), &pts, model.probs(), &opts, None)
}

/// Anchor for each time-`k` cell, taken from an anchor set that is constant
/// on the (coarser or equal) partition it is indexed by.
fn anchors_on<M: Manifold>(
    model: &DiscreteModel<M>,
    k: usize,
    anchors: &CellValues<M::Point>,
) -> Result<Vec<M::Point>> {
    let j = anchors.time_index;
    if j > k {
        return Err(GeoError::InvalidModel(format!(
            "anchors at time index {j} are not known at time index {k}"
        )));
    }
    if anchors.values.len() != model.partition(j).len() {
        return Err(GeoError::InvalidModel(format!(
            "{} anchors for {} cells",
            anchors.values.len(),
            model.partition(j).len()
        )));
    }
    let owner = model.partition(j).cell_of(model.n_atoms());
    Ok(model
        .partition(k)
        .cells()
        .iter()
        .map(|cell| anchors.values[owner[cell[0]]].clone())
        .collect())
}

fn tangent_means<M: Manifold>(
    model: &DiscreteModel<M>,
    k: usize,
    anchors: &[M::Point],
    target: impl Fn(usize) -> Result<M::Point>,
) -> Result<Vec<Vec<f64>>> {
    let m = model.manifold();
    let mut out = Vec::with_capacity(anchors.len());
    for (cell, anchor) in model.partition(k).cells().iter().zip(anchors) {
        let (w, total) = cell_weights(model, cell)?;
        let mut acc = vec![0.0; m.coord_dim()];
        for (&a, wa) in cell.iter().zip(&w) {
            for (s, l) in acc.iter_mut().zip(m.log(anchor, &target(a)?)?) {
                *s += wa * l;
            }
        }
        out.push(acc.into_iter().map(|s| s / total).collect());
    }
    Ok(out)
}

/// `E[Log_anchor(X_{t_k}) | cell]` for every cell of the time-`k` partition.
pub fn conditional_tangent_mean<M: Manifold>(
    model: &DiscreteModel<M>,
    k: usize,
    anchors: &CellValues<M::Point>,
) -> Result<Vec<Vec<f64>>> {
    let per_cell = anchors_on(model, k, anchors)?;
    tangent_means(model, k, &per_cell, |a| Ok(model.point(a, k).clone()))
}

/// The geodesic conditional expectation on the model grid.
///
/// Starts from [`frechet_initial`]. Each observation interval
/// `[t_{k-1}, t_k]` is split into `substeps` pieces; at the `j`-th piece
/// every atom's target is the point at fraction `j/substeps` of the geodesic
/// from `X_{k-1}` to `X_k`, and the running estimate of each time-`k` cell
/// moves by `Exp_{est}(E[Log_{est}(target) | cell])`.
pub fn geodesic_ce<M: Manifold>(
    model: &DiscreteModel<M>,
    substeps: usize,
) -> Result<ManifoldPath<M::Point>> {
    Ok(geodesic_ce_cells(model, substeps)?.into_path(model))
}

/// Per-cell output of [`geodesic_ce`].
#[derive(Debug, Clone)]
pub struct CellPath<P> {
    pub cells: Vec<Vec<P>>,
}

impl<P: Clone> CellPath<P> {
    pub fn at(&self, k: usize) -> CellValues<P> {
        CellValues {
            time_index: k,
            values: self.cells[k].clone(),
        }
    }

    pub fn into_path<M: Manifold<Point = P>>(self, model: &DiscreteModel<M>) -> ManifoldPath<P> {
        ManifoldPath::from_cells(
            model.times().to_vec(),
            model.partitions(),
            &self.cells,
            model.n_atoms(),
        )
    }
}

pub fn geodesic_ce_cells<M: Manifold>(
    model: &DiscreteModel<M>,
    substeps: usize,
) -> Result<CellPath<M::Point>> {
    if substeps == 0 {
        return Err(GeoError::InvalidModel("substeps must be at least 1".into()));
    }
    let m = model.manifold();
    let x0 = frechet_initial(model)?;
    let mut cells = vec![vec![x0; model.partition(0).len()]];
    for k in 1..model.n_times() {
        let mut est = anchors_on(
            model,
            k,
            &CellValues {
                time_index: k - 1,
                values: cells[k - 1].clone(),
            },
        )?;
        for j in 1..=substeps {
            let frac = j as f64 / substeps as f64;
            let v = tangent_means(model, k, &est, |a| {
                if j == substeps {
                    Ok(model.point(a, k).clone())
                } else {
                    m.geodesic(model.point(a, k - 1), model.point(a, k), frac)
                }
            })?;
            est = est
                .iter()
                .zip(&v)
                .map(|(e, vi)| m.exp(e, vi))
                .collect::<Result<_>>()?;
        }
        cells.push(est);
    }
    Ok(CellPath { cells })
}

/// Fréchet mean of each time-`k` cell, residual below `tol`.
pub fn intrinsic_ce<M: Manifold>(
    model: &DiscreteModel<M>,
    k: usize,
    tol: f64,
) -> Result<CellValues<M::Point>> {
    if !(tol > 0.0) {
        return Err(GeoError::InvalidInput("tolerance must be positive".into()));
    }
    let m = model.manifold();
    let opts = BarycenterOptions {
        tol,
        max_iter: 1000,
    };
    let mut values = Vec::with_capacity(model.partition(k).len());
    for cell in model.partition(k).cells() {
        let (w, total) = cell_weights(model, cell)?;
        let w: Vec<f64> = w.iter().map(|x| x / total).collect();
        let pts: Vec<M::Point> = cell.iter().map(|&a| model.point(a, k).clone()).collect();
        values.push(karcher_mean(m, &pts, &w, &opts, None)?);
    }
    Ok(CellValues {
        time_index: k,
        values,
    })
}
