//! Symmetric matrix calculus.
//!
//! Every matrix function here goes through the symmetric eigendecomposition
//! `S = Q diag(λ) Qᵀ`: apply the scalar function to `λ` and reconstruct.
//! Inputs are symmetrized as `(S + Sᵀ)/2` on construction so the stored
//! entries are exactly symmetric.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GeoError, Result};

/// Relative eigenvalue floor: a matrix is accepted as SPD only if
/// `λ_min > SPD_RATIO_FLOOR · λ_max`.
pub const SPD_RATIO_FLOOR: f64 = 1e-12;

/// A real symmetric D×D matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

/// A symmetric positive-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

/// Half-vectorization `(S₁₁, S₁₂, …, S₁D, S₂₂, …, S_DD)` of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VechVector {
    dim: usize,
    data: Vec<f64>,
}

/// Length of the half-vectorization of a D×D matrix.
pub fn vech_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(GeoError::InvalidInput("non-finite matrix entry".into()))
    }
}

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(GeoError::InvalidInput(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        check_finite(&m)?;
        Ok(SymMatrix(symmetrize(&m)))
    }

    /// Builds from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(GeoError::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(&self.0 * s)
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &other.0)
    }

    /// `G · S · Gᵀ` for symmetric `G`, re-symmetrized.
    pub(crate) fn congruence(&self, g: &DMatrix<f64>) -> SymMatrix {
        SymMatrix(symmetrize(&(g * &self.0 * g.transpose())))
    }

    /// Row-major entries.
    pub fn to_row_vec(&self) -> Vec<f64> {
        row_major(&self.0)
    }
}

impl SpdMatrix {
    /// Validates positive definiteness with the relative eigenvalue floor.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let s = SymMatrix::new(m)?;
        Self::try_from_sym(s)
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::try_from_sym(SymMatrix::from_row_slice(dim, entries)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::try_from_sym(SymMatrix::from_diagonal(diag)?)
    }

    pub fn identity(dim: usize) -> Self {
        SpdMatrix(DMatrix::identity(dim, dim))
    }

    pub fn try_from_sym(s: SymMatrix) -> Result<Self> {
        let (_, lambda) = sym_eigen(&s)?;
        check_spd_spectrum(&lambda)?;
        Ok(SpdMatrix(s.0))
    }

    /// Wraps a matrix known to be SPD by construction (e.g. a matrix exponential).
    pub(crate) fn from_sym_unchecked(s: SymMatrix) -> Self {
        SpdMatrix(s.0)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn as_sym(&self) -> SymMatrix {
        SymMatrix(self.0.clone())
    }

    pub fn to_row_vec(&self) -> Vec<f64> {
        row_major(&self.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// `(S^{1/2}, S^{-1/2})` from a single eigendecomposition.
    pub fn sqrt_and_inv_sqrt(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let (q, lambda) = eigen_unchecked(&self.0);
        let sqrt = reconstruct(&q, &lambda.map(f64::sqrt));
        let inv = reconstruct(&q, &lambda.map(|l| 1.0 / l.sqrt()));
        (sqrt, inv)
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * m.ncols());
    for i in 0..d {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn check_spd_spectrum(lambda: &DVector<f64>) -> Result<()> {
    // lambda is sorted descending
    let max_eig = lambda[0];
    let min_eig = lambda[lambda.len() - 1];
    if !(max_eig > 0.0) || min_eig <= SPD_RATIO_FLOOR * max_eig {
        return Err(GeoError::NotPositiveDefinite { min_eig, max_eig });
    }
    Ok(())
}

fn eigen_unchecked(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut q = DMatrix::zeros(n, n);
    let mut lambda = DVector::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        lambda[dst] = eig.eigenvalues[src];
        q.set_column(dst, &eig.eigenvectors.column(src));
    }
    (q, lambda)
}

fn reconstruct(q: &DMatrix<f64>, lambda: &DVector<f64>) -> DMatrix<f64> {
    let scaled = q * DMatrix::from_diagonal(lambda);
    symmetrize(&(scaled * q.transpose()))
}

/// Eigendecomposition with eigenvalues in descending order.
pub fn sym_eigen(s: &SymMatrix) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_finite(&s.0)?;
    Ok(eigen_unchecked(&s.0))
}

/// Applies a scalar function to the spectrum of a symmetric matrix.
pub fn spectral_map(s: &SymMatrix, f: impl Fn(f64) -> f64) -> SymMatrix {
    let (q, lambda) = eigen_unchecked(&s.0);
    SymMatrix(reconstruct(&q, &lambda.map(f)))
}

pub fn mat_sqrt(s: &SpdMatrix) -> SpdMatrix {
    SpdMatrix(spectral_map(&s.as_sym(), f64::sqrt).0)
}

pub fn mat_inv_sqrt(s: &SpdMatrix) -> SpdMatrix {
    SpdMatrix(spectral_map(&s.as_sym(), |l| 1.0 / l.sqrt()).0)
}

pub fn mat_log(s: &SpdMatrix) -> SymMatrix {
    spectral_map(&s.as_sym(), f64::ln)
}

pub fn mat_exp(v: &SymMatrix) -> SpdMatrix {
    SpdMatrix(spectral_map(v, f64::exp).0)
}

/// Square root of a symmetric matrix that must pass the SPD guard.
pub fn mat_sqrt_checked(s: &SymMatrix) -> Result<SpdMatrix> {
    Ok(mat_sqrt(&SpdMatrix::try_from_sym(s.clone())?))
}

/// Matrix logarithm of a symmetric matrix that must pass the SPD guard.
pub fn mat_log_checked(s: &SymMatrix) -> Result<SymMatrix> {
    Ok(mat_log(&SpdMatrix::try_from_sym(s.clone())?))
}

impl VechVector {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != vech_len(dim) {
            return Err(GeoError::InvalidInput(format!(
                "vech length {} does not match D={} (expected {})",
                data.len(),
                dim,
                vech_len(dim)
            )));
        }
        Ok(VechVector { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        VechVector {
            dim,
            data: vec![0.0; vech_len(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

pub fn vech(s: &SymMatrix) -> VechVector {
    let d = s.dim();
    let mut data = Vec::with_capacity(vech_len(d));
    for i in 0..d {
        for j in i..d {
            data.push(s.0[(i, j)]);
        }
    }
    VechVector { dim: d, data }
}

pub fn sym_from_vech(v: &VechVector) -> SymMatrix {
    let d = v.dim;
    let mut m = DMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in i..d {
            m[(i, j)] = v.data[k];
            m[(j, i)] = v.data[k];
            k += 1;
        }
    }
    SymMatrix(m)
}

/// Infers D from a half-vectorization length, if it is triangular.
pub fn dim_from_vech_len(len: usize) -> Option<usize> {
    let d = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (vech_len(d) == len).then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(rng: &mut ChaCha8Rng, d: usize) -> SymMatrix {
        let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        SymMatrix::new(m).unwrap()
    }

    fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> SpdMatrix {
        let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        SpdMatrix::new(&a * a.transpose() + DMatrix::identity(d, d) * 0.1).unwrap()
    }

    #[test]
    fn eigen_identity_and_diagonal() {
        let (q, l) = sym_eigen(&SymMatrix::from_diagonal(&[1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(l.as_slice(), &[1.0, 1.0]);
        assert!((q.abs() - DMatrix::identity(2, 2)).norm() < 1e-15);
        let (_, l) = sym_eigen(&SymMatrix::from_diagonal(&[1.0, 4.0]).unwrap()).unwrap();
        assert_eq!(l.as_slice(), &[4.0, 1.0]);
    }

    #[test]
    fn eigen_reconstruction_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2, 3, 5, 8] {
            let s = random_sym(&mut rng, d);
            let (q, l) = sym_eigen(&s).unwrap();
            let back = &q * DMatrix::from_diagonal(&l) * q.transpose();
            assert!((back - s.matrix()).norm() < 1e-12 * s.frobenius());
            assert!((q.transpose() * &q - DMatrix::identity(d, d)).norm() < 1e-12);
            assert!(l.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eigen_rejects_nan() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, f64::NAN, 1.0]);
        assert!(matches!(SymMatrix::new(m), Err(GeoError::InvalidInput(_))));
    }

    #[test]
    fn sqrt_cases() {
        assert_eq!(
            mat_sqrt(&SpdMatrix::identity(3)).matrix(),
            &DMatrix::identity(3, 3)
        );
        let r = mat_sqrt(&SpdMatrix::from_diagonal(&[4.0, 9.0]).unwrap());
        assert!((r.matrix() - DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0])).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 3, 5] {
            let s = random_spd(&mut rng, d);
            let r = mat_sqrt(&s);
            let rr = r.matrix() * r.matrix();
            assert!((rr - s.matrix()).norm() / s.frobenius() < 1e-10);
        }
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let s = SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
        assert!(matches!(
            mat_sqrt_checked(&s),
            Err(GeoError::NotPositiveDefinite { .. })
        ));
        let tiny = SymMatrix::from_diagonal(&[1.0, 1e-13]).unwrap();
        assert!(mat_log_checked(&tiny).is_err());
    }

    #[test]
    fn log_exp_cases() {
        assert!(mat_log(&SpdMatrix::identity(2)).frobenius() < 1e-15);
        let e = mat_exp(&SymMatrix::from_diagonal(&[1.0, 2.0]).unwrap());
        let expected = DMatrix::from_row_slice(2, 2, &[1f64.exp(), 0.0, 0.0, 2f64.exp()]);
        assert!((e.matrix() - expected).norm() < 1e-14);
    }

    #[test]
    fn log_exp_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2, 3, 5] {
            let s = random_spd(&mut rng, d);
            let back = mat_exp(&mat_log(&s));
            assert!((back.matrix() - s.matrix()).norm() / s.frobenius() < 1e-10);
            let v = random_sym(&mut rng, d);
            let back = mat_log(&mat_exp(&v));
            assert!((back.matrix() - v.matrix()).norm() / v.frobenius() < 1e-10);
        }
    }

    #[test]
    fn vech_pattern() {
        let s = sym_from_vech(&VechVector::new(2, vec![1.0, 2.0, 3.0]).unwrap());
        assert_eq!(
            s.matrix(),
            &DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0])
        );
        assert_eq!(sym_from_vech(&VechVector::zeros(3)), SymMatrix::zeros(3));
        let s3 = sym_from_vech(&VechVector::new(3, (1..=6).map(f64::from).collect()).unwrap());
        assert_eq!(
            s3.to_row_vec(),
            vec![1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]
        );
        assert!(VechVector::new(2, vec![1.0; 4]).is_err());
        assert_eq!(dim_from_vech_len(6), Some(3));
        assert_eq!(dim_from_vech_len(5), None);
    }

    #[test]
    fn vech_round_trip_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
        let vv = VechVector::new(3, v).unwrap();
        assert_eq!(vech(&sym_from_vech(&vv)), vv);
    }
}
