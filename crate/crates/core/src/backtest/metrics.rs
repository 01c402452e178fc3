//! Matrix and weight error norms.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatrixNorm {
    Frobenius,
    MaxModulus,
    /// Induced ∞-norm, the maximum absolute row sum.
    Inf,
    /// Largest singular value.
    Spectral,
}

impl MatrixNorm {
    pub const ALL: [MatrixNorm; 4] = [
        MatrixNorm::Frobenius,
        MatrixNorm::MaxModulus,
        MatrixNorm::Inf,
        MatrixNorm::Spectral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MatrixNorm::Frobenius => "Frobenius",
            MatrixNorm::MaxModulus => "MaxModulus",
            MatrixNorm::Inf => "Inf",
            MatrixNorm::Spectral => "Spectral",
        }
    }
}

impl fmt::Display for MatrixNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixErrors {
    pub frobenius: f64,
    pub max_modulus: f64,
    pub inf: f64,
    pub spectral: f64,
}

impl MatrixErrors {
    pub fn get(&self, norm: MatrixNorm) -> f64 {
        match norm {
            MatrixNorm::Frobenius => self.frobenius,
            MatrixNorm::MaxModulus => self.max_modulus,
            MatrixNorm::Inf => self.inf,
            MatrixNorm::Spectral => self.spectral,
        }
    }
}

/// The four norms of `a − b`.
pub fn matrix_errors(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<MatrixErrors> {
    if a.shape() != b.shape() {
        return Err(GeoError::DimensionMismatch {
            expected: a.nrows() * a.ncols(),
            got: b.nrows() * b.ncols(),
        });
    }
    let e = a - b;
    let spectral = if e.is_empty() {
        0.0
    } else {
        e.clone().singular_values().max()
    };
    Ok(MatrixErrors {
        frobenius: e.norm(),
        max_modulus: e.amax(),
        inf: e
            .row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        spectral,
    })
}

/// `(‖u − v‖₂, ‖u − v‖_∞)`.
pub fn weight_errors(u: &DVector<f64>, v: &DVector<f64>) -> Result<(f64, f64)> {
    if u.len() != v.len() {
        return Err(GeoError::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    let e = u - v;
    Ok((e.norm(), e.amax()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn hand_cases() {
        let z = DMatrix::zeros(2, 2);
        let e = matrix_errors(&z, &z).unwrap();
        assert_eq!(
            (e.frobenius, e.max_modulus, e.inf, e.spectral),
            (0.0, 0.0, 0.0, 0.0)
        );
        let e = matrix_errors(&dmatrix![1.0, 0.0; 0.0, -1.0], &z).unwrap();
        assert!((e.frobenius - 2f64.sqrt()).abs() < 1e-15);
        assert!(
            (e.max_modulus - 1.0).abs() + (e.inf - 1.0).abs() + (e.spectral - 1.0).abs() < 1e-14
        );
        let e = matrix_errors(&dmatrix![0.0, 2.0; 2.0, 0.0], &z).unwrap();
        assert!((e.frobenius - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(
            (e.max_modulus - 2.0).abs() + (e.inf - 2.0).abs() + (e.spectral - 2.0).abs() < 1e-14
        );
        assert!(matrix_errors(&z, &DMatrix::zeros(3, 3)).is_err());
    }
}
