//! Finite filtered probability models carrying manifold-valued paths.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::manifold::{EuclideanSpace, Manifold, SpdManifold};
use crate::markowitz::MarkowitzSpace;

/// A partition of the atom indices into nonempty cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition(pub Vec<Vec<usize>>);

impl Partition {
    pub fn trivial(n: usize) -> Self {
        Partition(vec![(0..n).collect()])
    }

    pub fn discrete(n: usize) -> Self {
        Partition((0..n).map(|i| vec![i]).collect())
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Cell index of every atom.
    pub fn cell_of(&self, n_atoms: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n_atoms];
        for (c, cell) in self.0.iter().enumerate() {
            for &a in cell {
                out[a] = c;
            }
        }
        out
    }

    fn validate(&self, n_atoms: usize, k: usize) -> Result<()> {
        let mut seen = vec![false; n_atoms];
        for cell in &self.0 {
            if cell.is_empty() {
                return Err(GeoError::InvalidModel(format!(
                    "empty cell at time index {k}"
                )));
            }
            for &a in cell {
                if a >= n_atoms {
                    return Err(GeoError::InvalidModel(format!(
                        "atom {a} out of range at time index {k}"
                    )));
                }
                if seen[a] {
                    return Err(GeoError::InvalidModel(format!(
                        "atom {a} appears twice at time index {k}"
                    )));
                }
                seen[a] = true;
            }
        }
        if let Some(a) = seen.iter().position(|s| !s) {
            return Err(GeoError::InvalidModel(format!(
                "atom {a} missing from partition at time index {k}"
            )));
        }
        Ok(())
    }

    /// True when every cell of `self` lies inside one cell of `coarser`.
    pub fn refines(&self, coarser: &Partition, n_atoms: usize) -> bool {
        let owner = coarser.cell_of(n_atoms);
        self.0
            .iter()
            .all(|cell| cell.iter().all(|&a| owner[a] == owner[cell[0]]))
    }
}

/// Values of a path per atom per time index.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPath<P> {
    pub times: Vec<f64>,
    /// `values[atom][time]`
    pub values: Vec<Vec<P>>,
}

impl<P: Clone> ManifoldPath<P> {
    pub fn n_atoms(&self) -> usize {
        self.values.len()
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn at(&self, atom: usize, k: usize) -> &P {
        &self.values[atom][k]
    }

    /// Builds a path from one value per cell per time.
    pub fn from_cells(
        times: Vec<f64>,
        partitions: &[Partition],
        cells: &[Vec<P>],
        n_atoms: usize,
    ) -> Self {
        let mut values: Vec<Vec<Option<P>>> = vec![vec![None; times.len()]; n_atoms];
        for (k, part) in partitions.iter().enumerate() {
            for (c, cell) in part.cells().iter().enumerate() {
                for &a in cell {
                    values[a][k] = Some(cells[k][c].clone());
                }
            }
        }
        ManifoldPath {
            times,
            values: values
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|v| v.expect("partition covers atoms"))
                        .collect()
                })
                .collect(),
        }
    }
}

/// A finite filtered probability space with an M-valued path per atom.
#[derive(Debug, Clone)]
pub struct DiscreteModel<M: Manifold> {
    manifold: M,
    atom_ids: Vec<String>,
    probs: Vec<f64>,
    times: Vec<f64>,
    partitions: Vec<Partition>,
    path: ManifoldPath<M::Point>,
}

impl<M: Manifold> DiscreteModel<M> {
    pub fn new(
        manifold: M,
        atom_ids: Vec<String>,
        probs: Vec<f64>,
        times: Vec<f64>,
        partitions: Vec<Partition>,
        values: Vec<Vec<M::Point>>,
    ) -> Result<Self> {
        let n = probs.len();
        if n == 0 {
            return Err(GeoError::InvalidModel("model has no atoms".into()));
        }
        if atom_ids.len() != n {
            return Err(GeoError::InvalidModel(format!(
                "{} atom ids for {} probabilities",
                atom_ids.len(),
                n
            )));
        }
        if probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(GeoError::InvalidModel(
                "probabilities must be positive".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(GeoError::InvalidModel(format!(
                "probabilities sum to {total}"
            )));
        }
        if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(GeoError::InvalidModel(
                "times must be strictly increasing".into(),
            ));
        }
        if partitions.len() != times.len() {
            return Err(GeoError::InvalidModel(format!(
                "{} partitions for {} times",
                partitions.len(),
                times.len()
            )));
        }
        for (k, p) in partitions.iter().enumerate() {
            p.validate(n, k)?;
        }
        for k in 1..partitions.len() {
            if !partitions[k].refines(&partitions[k - 1], n) {
                return Err(GeoError::InvalidModel(format!(
                    "partition at time index {k} does not refine time index {}",
                    k - 1
                )));
            }
        }
        if values.len() != n || values.iter().any(|row| row.len() != times.len()) {
            return Err(GeoError::InvalidModel(
                "path must have one point per atom per time".into(),
            ));
        }
        Ok(DiscreteModel {
            manifold,
            atom_ids,
            probs,
            times: times.clone(),
            partitions,
            path: ManifoldPath { times, values },
        })
    }

    pub fn manifold(&self) -> &M {
        &self.manifold
    }

    pub fn n_atoms(&self) -> usize {
        self.probs.len()
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn atom_ids(&self) -> &[String] {
        &self.atom_ids
    }

    pub fn partition(&self, k: usize) -> &Partition {
        &self.partitions[k]
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn path(&self) -> &ManifoldPath<M::Point> {
        &self.path
    }

    pub fn point(&self, atom: usize, k: usize) -> &M::Point {
        &self.path.values[atom][k]
    }

    /// Index of the cell at `k - 1` containing each cell at `k`.
    pub fn parent_cells(&self, k: usize) -> Vec<usize> {
        let owner = self.partitions[k - 1].cell_of(self.n_atoms());
        self.partitions[k]
            .cells()
            .iter()
            .map(|cell| owner[cell[0]])
            .collect()
    }

    /// True when `z` is constant on each cell at each time (exact equality of
    /// flattened coordinates).
    pub fn is_adapted(&self, z: &ManifoldPath<M::Point>) -> bool {
        if z.n_atoms() != self.n_atoms() || z.n_times() != self.n_times() {
            return false;
        }
        self.partitions.iter().enumerate().all(|(k, part)| {
            part.cells().iter().all(|cell| {
                let first = self.manifold.flatten(&z.values[cell[0]][k]);
                cell.iter()
                    .all(|&a| self.manifold.flatten(&z.values[a][k]) == first)
            })
        })
    }

    /// Largest pairwise distance among all path points.
    pub fn diameter(&self) -> Result<f64> {
        let pts: Vec<&M::Point> = self.path.values.iter().flatten().collect();
        let mut best = 0.0f64;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                best = best.max(self.manifold.distance(pts[i], pts[j])?);
            }
        }
        Ok(best)
    }
}

/// Geometry tag in the on-disk format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeometrySpec {
    Spd { dim: usize },
    Euclidean { dim: usize },
    Markowitz { dim: usize },
}

/// On-disk model schema (JSON).
///
/// ```json
/// {
///   "geometry": {"kind": "spd", "dim": 2},
///   "atoms": ["w0", "w1"],
///   "probs": [0.5, 0.5],
///   "times": [0.0, 1.0],
///   "partitions": [[[0, 1]], [[0], [1]]],
///   "paths": [[[1.0, 0.0, 0.0, 1.0], [2.0, 0.0, 0.0, 2.0]],
///             [[1.0, 0.0, 0.0, 1.0], [0.5, 0.0, 0.0, 0.5]]]
/// }
/// ```
///
/// `paths[atom][time]` is the flattened point: SPD matrices row-major,
/// Euclidean points as coordinates, Markowitz points as `[γ, μ…, Σ row-major]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub geometry: GeometrySpec,
    pub atoms: Vec<String>,
    pub probs: Vec<f64>,
    pub times: Vec<f64>,
    pub partitions: Vec<Partition>,
    pub paths: Vec<Vec<Vec<f64>>>,
}

/// A model over any of the supported geometries.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Spd(DiscreteModel<SpdManifold>),
    Euclidean(DiscreteModel<EuclideanSpace>),
    Markowitz(DiscreteModel<MarkowitzSpace>),
}

fn build<M: Manifold>(m: M, f: ModelFile) -> Result<DiscreteModel<M>> {
    let mut values = Vec::with_capacity(f.paths.len());
    for (a, row) in f.paths.iter().enumerate() {
        let mut pts = Vec::with_capacity(row.len());
        for (k, flat) in row.iter().enumerate() {
            if flat.len() != m.flat_len() {
                return Err(GeoError::InvalidModel(format!(
                    "atom {a} time {k}: {} entries, expected {}",
                    flat.len(),
                    m.flat_len()
                )));
            }
            pts.push(
                m.unflatten(flat)
                    .map_err(|e| GeoError::InvalidModel(format!("atom {a} time {k}: {e}")))?,
            );
        }
        values.push(pts);
    }
    DiscreteModel::new(m, f.atoms, f.probs, f.times, f.partitions, values)
}

fn export<M: Manifold>(geometry: GeometrySpec, m: &DiscreteModel<M>) -> ModelFile {
    ModelFile {
        geometry,
        atoms: m.atom_ids.clone(),
        probs: m.probs.clone(),
        times: m.times.clone(),
        partitions: m.partitions.clone(),
        paths: m
            .path
            .values
            .iter()
            .map(|row| row.iter().map(|p| m.manifold.flatten(p)).collect())
            .collect(),
    }
}

impl AnyModel {
    pub fn from_file_data(f: ModelFile) -> Result<Self> {
        Ok(match f.geometry {
            GeometrySpec::Spd { dim } => AnyModel::Spd(build(SpdManifold::new(dim), f)?),
            GeometrySpec::Euclidean { dim } => {
                AnyModel::Euclidean(build(EuclideanSpace::new(dim), f)?)
            }
            GeometrySpec::Markowitz { dim } => {
                AnyModel::Markowitz(build(MarkowitzSpace::new(dim), f)?)
            }
        })
    }

    pub fn to_file_data(&self) -> ModelFile {
        match self {
            AnyModel::Spd(m) => export(
                GeometrySpec::Spd {
                    dim: m.manifold.dim(),
                },
                m,
            ),
            AnyModel::Euclidean(m) => export(
                GeometrySpec::Euclidean {
                    dim: m.manifold.coord_dim(),
                },
                m,
            ),
            AnyModel::Markowitz(m) => export(
                GeometrySpec::Markowitz {
                    dim: m.manifold.dim(),
                },
                m,
            ),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)?;
        Self::from_file_data(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file_data()).expect("model serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ModelFile {
        ModelFile {
            geometry: GeometrySpec::Euclidean { dim: 1 },
            atoms: vec!["a".into(), "b".into()],
            probs: vec![0.5, 0.5],
            times: vec![0.0, 1.0],
            partitions: vec![Partition::trivial(2), Partition::discrete(2)],
            paths: vec![vec![vec![0.0], vec![1.0]], vec![vec![0.0], vec![-1.0]]],
        }
    }

    #[test]
    fn json_round_trip() {
        let m = AnyModel::from_file_data(tiny()).unwrap();
        let back = AnyModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back.to_file_data(), tiny());
    }

    #[test]
    fn rejects_non_refining_filtration() {
        let mut f = tiny();
        f.partitions = vec![Partition::discrete(2), Partition::trivial(2)];
        assert!(matches!(
            AnyModel::from_file_data(f),
            Err(GeoError::InvalidModel(_))
        ));
    }

    #[test]
    fn rejects_bad_probs_and_times() {
        let mut f = tiny();
        f.probs = vec![0.6, 0.5];
        assert!(AnyModel::from_file_data(f).is_err());
        let mut f = tiny();
        f.times = vec![1.0, 1.0];
        assert!(AnyModel::from_file_data(f).is_err());
        let mut f = tiny();
        f.partitions[1] = Partition(vec![vec![0], vec![0, 1]]);
        assert!(AnyModel::from_file_data(f).is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = tiny_json().replace("\"atoms\"", "\"extra\": 1, \"atoms\"");
        assert!(AnyModel::from_json(&text).is_err());
    }

    fn tiny_json() -> String {
        serde_json::to_string(&tiny()).unwrap()
    }

    #[test]
    fn rejects_non_spd_point() {
        let f = ModelFile {
            geometry: GeometrySpec::Spd { dim: 1 },
            atoms: vec!["a".into()],
            probs: vec![1.0],
            times: vec![0.0],
            partitions: vec![Partition::trivial(1)],
            paths: vec![vec![vec![-1.0]]],
        };
        assert!(matches!(
            AnyModel::from_file_data(f),
            Err(GeoError::InvalidModel(_))
        ));
    }
}
