//! Small seeded models used by tests, the verify suite and the data files.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::manifold::{EuclideanSpace, Manifold, SpdManifold};
use crate::spd::spd_exp;
use crate::sym::{sym_from_vech, vech_len, SpdMatrix, VechVector};

use super::model::{DiscreteModel, Partition};

/// Eight atoms, six times: trivial, halves, halves, pairs, pairs, pairs.
pub fn binary_filtration() -> Vec<Partition> {
    let halves = Partition(vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
    let pairs = Partition(vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]]);
    vec![
        Partition::trivial(8),
        halves.clone(),
        halves,
        pairs.clone(),
        pairs.clone(),
        pairs,
    ]
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

fn seeded_probs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            1.0 + 0.3 * z.tanh()
        })
        .collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|r| r / s).collect()
}

fn normals(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect()
}

fn random_walk<M: Manifold>(
    m: &M,
    start: &M::Point,
    rng: &mut ChaCha8Rng,
    steps: usize,
    scale: f64,
) -> Vec<M::Point> {
    let mut out = vec![m
        .exp(start, &normals(rng, m.coord_dim(), scale))
        .expect("step stays on manifold")];
    for _ in 0..steps {
        let v = normals(rng, m.coord_dim(), scale);
        let next = m
            .exp(out.last().expect("nonempty"), &v)
            .expect("step stays on manifold");
        out.push(next);
    }
    out
}

/// Random walk whose steps are Gaussian in the whitened frame
/// `X^{-1/2} V X^{-1/2}`, so the step size is measured in the metric.
fn spd_walk(start: &SpdMatrix, rng: &mut ChaCha8Rng, steps: usize, scale: f64) -> Vec<SpdMatrix> {
    let step = |x: &SpdMatrix, rng: &mut ChaCha8Rng| {
        let v = sym_from_vech(
            &VechVector::new(x.dim(), normals(rng, vech_len(x.dim()), scale)).expect("vech length"),
        );
        let (sqrt, _) = x.sqrt_and_inv_sqrt();
        spd_exp(x, &v.congruence(&sqrt)).expect("step stays on manifold")
    };
    let mut out = vec![step(start, rng)];
    for _ in 0..steps {
        let next = step(out.last().expect("nonempty"), rng);
        out.push(next);
    }
    out
}

/// Eight atoms on SPD(2), times 0..=5, on [`binary_filtration`].
pub fn spd8_model(seed: u64) -> DiscreteModel<SpdManifold> {
    let m = SpdManifold::new(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = seeded_probs(&mut rng, 8);
    let start = SpdMatrix::identity(2);
    let paths = (0..8).map(|_| spd_walk(&start, &mut rng, 5, 0.3)).collect();
    DiscreteModel::new(
        m,
        ids(8),
        probs,
        (0..6).map(f64::from).collect(),
        binary_filtration(),
        paths,
    )
    .expect("bundled model is valid")
}

/// Eight atoms in ℝ^d on [`binary_filtration`].
pub fn euclidean8_model(dim: usize, seed: u64) -> DiscreteModel<EuclideanSpace> {
    let m = EuclideanSpace::new(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = seeded_probs(&mut rng, 8);
    let start = vec![0.0; dim];
    let paths = (0..8)
        .map(|_| random_walk(&m, &start, &mut rng, 5, 1.0))
        .collect();
    DiscreteModel::new(
        m,
        ids(8),
        probs,
        (0..6).map(f64::from).collect(),
        binary_filtration(),
        paths,
    )
    .expect("bundled model is valid")
}

/// Four atoms in ℝ¹ over three times with a two-step split.
pub fn r1_model(seed: u64) -> DiscreteModel<EuclideanSpace> {
    let m = EuclideanSpace::new(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = seeded_probs(&mut rng, 4);
    let paths = (0..4)
        .map(|_| random_walk(&m, &vec![0.0], &mut rng, 2, 1.0))
        .collect();
    let parts = vec![
        Partition::trivial(4),
        Partition(vec![vec![0, 1], vec![2, 3]]),
        Partition(vec![vec![0, 1], vec![2], vec![3]]),
    ];
    DiscreteModel::new(m, ids(4), probs, vec![0.0, 1.0, 2.0], parts, paths)
        .expect("bundled model is valid")
}

/// Every atom follows the same SPD(2) path.
pub fn deterministic_spd_model(seed: u64) -> DiscreteModel<SpdManifold> {
    let m = SpdManifold::new(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let path = spd_walk(&SpdMatrix::identity(2), &mut rng, 5, 0.3);
    let probs = seeded_probs(&mut rng, 8);
    DiscreteModel::new(
        m,
        ids(8),
        probs,
        (0..6).map(f64::from).collect(),
        binary_filtration(),
        vec![path; 8],
    )
    .expect("bundled model is valid")
}
