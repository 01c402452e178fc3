//! Affine-invariant geometry of the SPD cone.

use crate::error::{GeoError, Result};
use crate::manifold::{karcher_mean, BarycenterOptions, Manifold, SpdManifold};
use crate::sym::{mat_exp, spectral_map, sym_eigen, SpdMatrix, SymMatrix};

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(GeoError::DimensionMismatch {
            expected: a,
            got: b,
        });
    }
    Ok(())
}

/// `B^{-1/2} A B^{-1/2}`, symmetrized.
fn whiten(a: &SpdMatrix, b_inv_sqrt: &nalgebra::DMatrix<f64>) -> SymMatrix {
    a.as_sym().congruence(b_inv_sqrt)
}

/// Geodesic distance `‖log(S₂^{-1/2} S₁ S₂^{-1/2})‖_F`, evaluated from the
/// eigenvalues of the whitened matrix.
pub fn spd_distance(s1: &SpdMatrix, s2: &SpdMatrix) -> Result<f64> {
    check_dims(s1.dim(), s2.dim())?;
    if s1 == s2 {
        return Ok(0.0);
    }
    let (_, inv_sqrt) = s2.sqrt_and_inv_sqrt();
    let (_, lambda) = sym_eigen(&whiten(s1, &inv_sqrt))?;
    if lambda.iter().any(|&l| l <= 0.0) {
        let min_eig = lambda[lambda.len() - 1];
        return Err(GeoError::NotPositiveDefinite {
            min_eig,
            max_eig: lambda[0],
        });
    }
    Ok(lambda.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
}

/// Riemannian logarithm `Log_base(target)`, a symmetric tangent matrix at `base`.
pub fn spd_log(base: &SpdMatrix, target: &SpdMatrix) -> Result<SymMatrix> {
    check_dims(base.dim(), target.dim())?;
    let (sqrt, inv_sqrt) = base.sqrt_and_inv_sqrt();
    let inner = whiten(target, &inv_sqrt);
    let (_, lambda) = sym_eigen(&inner)?;
    if lambda[lambda.len() - 1] <= 0.0 {
        return Err(GeoError::NotPositiveDefinite {
            min_eig: lambda[lambda.len() - 1],
            max_eig: lambda[0],
        });
    }
    Ok(spectral_map(&inner, f64::ln).congruence(&sqrt))
}

fn exp_raw(base: &SpdMatrix, v: &SymMatrix) -> SymMatrix {
    let (sqrt, inv_sqrt) = base.sqrt_and_inv_sqrt();
    mat_exp(&v.congruence(&inv_sqrt)).as_sym().congruence(&sqrt)
}

/// Riemannian exponential `Exp_base(v)`. The result passes the SPD guard or
/// the call fails, so extreme tangent vectors surface as errors.
pub fn spd_exp(base: &SpdMatrix, v: &SymMatrix) -> Result<SpdMatrix> {
    check_dims(base.dim(), v.dim())?;
    let e = exp_raw(base, v);
    if e.matrix().iter().any(|x| !x.is_finite()) {
        return Err(GeoError::InvalidInput(
            "matrix exponential overflowed".into(),
        ));
    }
    SpdMatrix::try_from_sym(e)
}

/// Norm of a tangent vector in the metric at `base`: `‖base^{-1/2} v base^{-1/2}‖_F`.
pub fn spd_tangent_norm(base: &SpdMatrix, v: &SymMatrix) -> Result<f64> {
    check_dims(base.dim(), v.dim())?;
    let (_, inv_sqrt) = base.sqrt_and_inv_sqrt();
    Ok(v.congruence(&inv_sqrt).frobenius())
}

/// Constant-speed geodesic `t ↦ Exp_base(t·velocity)`.
#[derive(Debug, Clone)]
pub struct GeodesicSegment {
    pub base: SpdMatrix,
    pub velocity: SymMatrix,
}

impl GeodesicSegment {
    pub fn new(base: SpdMatrix, velocity: SymMatrix) -> Result<Self> {
        check_dims(base.dim(), velocity.dim())?;
        Ok(GeodesicSegment { base, velocity })
    }

    /// The segment from `a` to `b`.
    pub fn between(a: &SpdMatrix, b: &SpdMatrix) -> Result<Self> {
        Ok(GeodesicSegment {
            base: a.clone(),
            velocity: spd_log(a, b)?,
        })
    }
}

pub fn geodesic_point(seg: &GeodesicSegment, t: f64) -> SpdMatrix {
    if t == 0.0 {
        return seg.base.clone();
    }
    SpdMatrix::from_sym_unchecked(exp_raw(&seg.base, &seg.velocity.scale(t)))
}

/// Weighted SPD sample; weights are nonnegative and sum to one.
#[derive(Debug, Clone)]
pub struct WeightedPointCloud {
    points: Vec<SpdMatrix>,
    weights: Vec<f64>,
}

impl WeightedPointCloud {
    pub fn new(points: Vec<SpdMatrix>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(GeoError::InvalidInput("empty point cloud".into()));
        }
        if points.len() != weights.len() {
            return Err(GeoError::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        let d = points[0].dim();
        for p in &points {
            check_dims(d, p.dim())?;
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(GeoError::InvalidInput(
                "negative or non-finite weight".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(GeoError::InvalidInput(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(WeightedPointCloud { points, weights })
    }

    /// Equal weights.
    pub fn uniform(points: Vec<SpdMatrix>) -> Result<Self> {
        let n = points.len().max(1);
        Self::new(points, vec![1.0 / n as f64; n])
    }

    pub fn points(&self) -> &[SpdMatrix] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}

/// Fréchet (Karcher) mean by the fixed-point iteration
/// `x ← Exp_x(Σ wⱼ Log_x(Yⱼ))`, stopped when the Frobenius norm of the
/// tangent mean drops below `tol`.
pub fn intrinsic_barycenter(
    cloud: &WeightedPointCloud,
    tol: f64,
    max_iter: usize,
) -> Result<SpdMatrix> {
    let m = SpdManifold::new(cloud.dim());
    let opts = BarycenterOptions { tol, max_iter };
    karcher_mean(&m, cloud.points(), cloud.weights(), &opts, None)
}

/// Barycenter with the default scale-aware tolerance.
pub fn intrinsic_barycenter_default(cloud: &WeightedPointCloud) -> Result<SpdMatrix> {
    let m = SpdManifold::new(cloud.dim());
    let opts = BarycenterOptions::scaled_default(&m, cloud.points())?;
    karcher_mean(&m, cloud.points(), cloud.weights(), &opts, None)
}

/// `Exp_{Y₁}((1/n) Σⱼ Log_{Y₁}(Yⱼ))`, anchored at the first point.
pub fn extrinsic_barycenter(points: &[SpdMatrix]) -> Result<SpdMatrix> {
    let first = points
        .first()
        .ok_or_else(|| GeoError::InvalidInput("empty point list".into()))?;
    let mut acc = SymMatrix::zeros(first.dim());
    for p in points {
        acc = acc.add(&spd_log(first, p)?);
    }
    spd_exp(first, &acc.scale(1.0 / points.len() as f64))
}

/// Residual `‖Σ wⱼ Log_x(Yⱼ)‖_F` of the barycenter first-order condition.
pub fn barycenter_residual(x: &SpdMatrix, cloud: &WeightedPointCloud) -> Result<f64> {
    let mut acc = SymMatrix::zeros(x.dim());
    for (p, &w) in cloud.points().iter().zip(cloud.weights()) {
        acc = acc.add(&spd_log(x, p)?.scale(w));
    }
    Ok(acc.frobenius())
}

impl Manifold for SpdManifold {
    type Point = SpdMatrix;

    fn coord_dim(&self) -> usize {
        crate::sym::vech_len(self.dim())
    }

    fn log(&self, base: &SpdMatrix, target: &SpdMatrix) -> Result<Vec<f64>> {
        Ok(crate::sym::vech(&spd_log(base, target)?).into_vec())
    }

    fn exp(&self, base: &SpdMatrix, v: &[f64]) -> Result<SpdMatrix> {
        spd_exp(base, &self.tangent_matrix(v)?)
    }

    fn distance(&self, a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
        spd_distance(a, b)
    }

    fn tangent_norm(&self, base: &SpdMatrix, v: &[f64]) -> Result<f64> {
        spd_tangent_norm(base, &self.tangent_matrix(v)?)
    }

    fn ambient_norm(&self, v: &[f64]) -> f64 {
        self.tangent_matrix(v)
            .map(|m| m.frobenius())
            .unwrap_or(f64::NAN)
    }

    fn flatten(&self, p: &SpdMatrix) -> Vec<f64> {
        p.to_row_vec()
    }

    fn unflatten(&self, data: &[f64]) -> Result<SpdMatrix> {
        SpdMatrix::from_row_slice(self.dim(), data)
    }

    fn flat_len(&self) -> usize {
        self.dim() * self.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> SpdMatrix {
        let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        SpdMatrix::new(&a * a.transpose() + DMatrix::identity(d, d) * 0.2).unwrap()
    }

    fn diag(v: &[f64]) -> SpdMatrix {
        SpdMatrix::from_diagonal(v).unwrap()
    }

    #[test]
    fn distance_closed_forms() {
        let i = SpdMatrix::identity(2);
        assert_eq!(spd_distance(&i, &i).unwrap(), 0.0);
        let e2 = diag(&[2f64.exp().powi(1), 2f64.exp()]);
        assert!((spd_distance(&i, &e2).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [2usize, 3, 5] {
            let a: f64 = rng.random_range(0.1..10.0);
            let b: f64 = rng.random_range(0.1..10.0);
            let da = SpdMatrix::new(DMatrix::identity(d, d) * a).unwrap();
            let db = SpdMatrix::new(DMatrix::identity(d, d) * b).unwrap();
            let expect = (d as f64).sqrt() * (a / b).ln().abs();
            assert!((spd_distance(&da, &db).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let r = spd_distance(&SpdMatrix::identity(2), &SpdMatrix::identity(3));
        assert!(matches!(r, Err(GeoError::DimensionMismatch { .. })));
        assert!(spd_exp(&SpdMatrix::identity(2), &SymMatrix::zeros(3)).is_err());
    }

    #[test]
    fn log_exp_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_spd(&mut rng, 3);
        assert!(spd_log(&s, &s).unwrap().frobenius() < 1e-12);
        let l = spd_log(&SpdMatrix::identity(2), &diag(&[1f64.exp(), 3f64.exp()])).unwrap();
        assert!(
            (l.matrix() - DMatrix::from_diagonal(&nalgebra::dvector![1.0, 3.0])).norm() < 1e-12
        );
        let e = spd_exp(
            &SpdMatrix::identity(2),
            &SymMatrix::from_diagonal(&[1.0, 2.0]).unwrap(),
        )
        .unwrap();
        assert!((e.matrix() - diag(&[1f64.exp(), 2f64.exp()]).matrix()).norm() < 1e-12);
        assert_eq!(
            spd_exp(&s, &SymMatrix::zeros(3))
                .unwrap()
                .matrix()
                .clone()
                .map(|x| (x * 1e9).round()),
            s.matrix().map(|x| (x * 1e9).round())
        );
        for _ in 0..20 {
            let base = random_spd(&mut rng, 3);
            let target = random_spd(&mut rng, 3);
            let v = spd_log(&base, &target).unwrap();
            let back = spd_exp(&base, &v).unwrap();
            assert!(spd_distance(&back, &target).unwrap() < 1e-9);
            let v2 = spd_log(&base, &back).unwrap();
            assert!(v2.sub(&v).frobenius() < 1e-9 * (1.0 + v.frobenius()));
            // ‖Log‖ at base equals the distance
            let n = spd_tangent_norm(&base, &v).unwrap();
            assert!((n - spd_distance(&base, &target).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn geodesic_points() {
        let seg =
            GeodesicSegment::between(&SpdMatrix::identity(2), &diag(&[2f64.exp(), 2f64.exp()]))
                .unwrap();
        assert_eq!(geodesic_point(&seg, 0.0), SpdMatrix::identity(2));
        let mid = geodesic_point(&seg, 0.5);
        assert!((mid.matrix() - diag(&[1f64.exp(), 1f64.exp()]).matrix()).norm() < 1e-12);
        let end = geodesic_point(&seg, 1.0);
        assert!(
            (end.matrix() - spd_exp(&seg.base, &seg.velocity).unwrap().matrix()).norm() < 1e-14
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_spd(&mut rng, 3);
        let b = random_spd(&mut rng, 3);
        let seg = GeodesicSegment::between(&a, &b).unwrap();
        let full = spd_distance(&a, &b).unwrap();
        for t in [0.1, 0.3, 0.77, 1.0] {
            let p = geodesic_point(&seg, t);
            assert!((spd_distance(&a, &p).unwrap() - t * full).abs() < 1e-9);
        }
    }

    #[test]
    fn cloud_validation() {
        let a = SpdMatrix::identity(2);
        assert!(WeightedPointCloud::new(vec![], vec![]).is_err());
        assert!(WeightedPointCloud::new(vec![a.clone()], vec![0.5]).is_err());
        assert!(
            WeightedPointCloud::new(vec![a.clone(), SpdMatrix::identity(3)], vec![0.5, 0.5])
                .is_err()
        );
        assert!(WeightedPointCloud::new(vec![a.clone(), a], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn barycenter_single_point_and_ext() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_spd(&mut rng, 2);
        let cloud = WeightedPointCloud::uniform(vec![a.clone()]).unwrap();
        let m = intrinsic_barycenter(&cloud, 1e-12, 200).unwrap();
        assert!(spd_distance(&m, &a).unwrap() < 1e-12);
        let e = extrinsic_barycenter(&[a.clone()]).unwrap();
        assert!(spd_distance(&e, &a).unwrap() < 1e-12);
        let e = extrinsic_barycenter(&[a.clone(), a.clone(), a.clone()]).unwrap();
        assert!(spd_distance(&e, &a).unwrap() < 1e-12);
        assert!(extrinsic_barycenter(&[]).is_err());
    }

    #[test]
    fn barycenter_max_iter_reports_last_iterate() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pts: Vec<_> = (0..5).map(|_| random_spd(&mut rng, 3)).collect();
        let cloud = WeightedPointCloud::uniform(pts).unwrap();
        match intrinsic_barycenter(&cloud, 1e-300, 2) {
            Err(GeoError::MaxIterExceeded {
                iterations,
                last,
                residual,
            }) => {
                assert_eq!(iterations, 2);
                assert_eq!(last.len(), 9);
                assert!(residual > 0.0);
            }
            other => panic!("expected MaxIterExceeded, got {other:?}"),
        }
    }
}
