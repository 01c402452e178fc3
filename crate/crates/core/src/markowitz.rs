//! The Markowitz space ℝ × ℝ^D × SPD(D) and the efficient-portfolio map.

use nalgebra::DVector;

use crate::error::{GeoError, Result};
use crate::manifold::{euclid_norm, Manifold};
use crate::spd::{spd_distance, spd_exp, spd_log, spd_tangent_norm};
use crate::sym::{sym_from_vech, vech, vech_len, SpdMatrix, SymMatrix, VechVector};

/// A point `(γ, μ, Σ)`: risk aversion, expected log-returns, covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkowitzPoint {
    pub gamma: f64,
    pub mu: DVector<f64>,
    pub sigma: SpdMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkowitzTangent {
    pub dgamma: f64,
    pub dmu: DVector<f64>,
    pub dsigma: SymMatrix,
}

/// Fractions of wealth; entries sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioWeights(DVector<f64>);

impl PortfolioWeights {
    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

impl MarkowitzPoint {
    pub fn new(gamma: f64, mu: DVector<f64>, sigma: SpdMatrix) -> Result<Self> {
        if mu.len() != sigma.dim() {
            return Err(GeoError::DimensionMismatch {
                expected: sigma.dim(),
                got: mu.len(),
            });
        }
        if !gamma.is_finite() || mu.iter().any(|x| !x.is_finite()) {
            return Err(GeoError::InvalidInput("non-finite gamma or mu".into()));
        }
        Ok(MarkowitzPoint { gamma, mu, sigma })
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }
}

impl MarkowitzTangent {
    pub fn zeros(dim: usize) -> Self {
        MarkowitzTangent {
            dgamma: 0.0,
            dmu: DVector::zeros(dim),
            dsigma: SymMatrix::zeros(dim),
        }
    }
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(GeoError::DimensionMismatch {
            expected: a,
            got: b,
        });
    }
    Ok(())
}

/// Product-metric distance `sqrt(Δγ² + ‖Δμ‖² + d_g²(Σ₁, Σ₂))`.
pub fn mrk_distance(p1: &MarkowitzPoint, p2: &MarkowitzPoint) -> Result<f64> {
    same_dim(p1.dim(), p2.dim())?;
    let dg = p2.gamma - p1.gamma;
    let dmu = (&p2.mu - &p1.mu).norm_squared();
    let ds = spd_distance(&p1.sigma, &p2.sigma)?;
    Ok((dg * dg + dmu + ds * ds).sqrt())
}

pub fn mrk_exp(p: &MarkowitzPoint, v: &MarkowitzTangent) -> Result<MarkowitzPoint> {
    same_dim(p.dim(), v.dmu.len())?;
    Ok(MarkowitzPoint {
        gamma: p.gamma + v.dgamma,
        mu: &p.mu + &v.dmu,
        sigma: spd_exp(&p.sigma, &v.dsigma)?,
    })
}

pub fn mrk_log(p1: &MarkowitzPoint, p2: &MarkowitzPoint) -> Result<MarkowitzTangent> {
    same_dim(p1.dim(), p2.dim())?;
    Ok(MarkowitzTangent {
        dgamma: p2.gamma - p1.gamma,
        dmu: &p2.mu - &p1.mu,
        dsigma: spd_log(&p1.sigma, &p2.sigma)?,
    })
}

/// Solution of `min −γμᵀw + wᵀΣw/2` subject to `1ᵀw = 1`:
///
/// ```text
/// ŵ = Σ⁻¹1/(1ᵀΣ⁻¹1) + γ (Σ⁻¹μ − (1ᵀΣ⁻¹μ)/(1ᵀΣ⁻¹1) Σ⁻¹1)
/// ```
///
/// computed with a Cholesky solve.
pub fn efficient_weights(
    gamma: f64,
    mu: &DVector<f64>,
    sigma: &SpdMatrix,
) -> Result<PortfolioWeights> {
    same_dim(sigma.dim(), mu.len())?;
    let chol = sigma
        .matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| GeoError::NotPositiveDefinite {
            min_eig: f64::NAN,
            max_eig: f64::NAN,
        })?;
    let ones = DVector::from_element(mu.len(), 1.0);
    let s1 = chol.solve(&ones);
    let smu = chol.solve(mu);
    Ok(combine(gamma, &ones, &s1, &smu))
}

/// Same formula for any invertible symmetric matrix (LU solve). Used when a
/// Euclidean forecast leaves the SPD cone.
pub fn efficient_weights_sym(
    gamma: f64,
    mu: &DVector<f64>,
    sigma: &SymMatrix,
) -> Result<PortfolioWeights> {
    same_dim(sigma.dim(), mu.len())?;
    let lu = sigma.matrix().clone().lu();
    let ones = DVector::from_element(mu.len(), 1.0);
    let s1 = lu
        .solve(&ones)
        .ok_or_else(|| GeoError::InvalidInput("singular covariance".into()))?;
    let smu = lu
        .solve(mu)
        .ok_or_else(|| GeoError::InvalidInput("singular covariance".into()))?;
    let denom = ones.dot(&s1);
    if denom.abs() < f64::EPSILON * s1.norm() {
        return Err(GeoError::InvalidInput("1ᵀΣ⁻¹1 vanishes".into()));
    }
    Ok(combine(gamma, &ones, &s1, &smu))
}

fn combine(
    gamma: f64,
    ones: &DVector<f64>,
    s1: &DVector<f64>,
    smu: &DVector<f64>,
) -> PortfolioWeights {
    let a = ones.dot(s1);
    let b = ones.dot(smu);
    let min_var = s1 / a;
    let tilt = smu - s1 * (b / a);
    let mut w = min_var + tilt * gamma;
    // one Newton correction on the budget to remove rounding drift
    let excess = w.sum() - 1.0;
    w -= &(s1 * (excess / a));
    PortfolioWeights(w)
}

/// `(γ, μ, Σ)` as a manifold, tangent coordinates `(dγ, dμ, vech(dΣ))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkowitzSpace {
    dim: usize,
}

impl MarkowitzSpace {
    pub fn new(dim: usize) -> Self {
        MarkowitzSpace { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tangent_from_coords(&self, v: &[f64]) -> Result<MarkowitzTangent> {
        same_dim(self.coord_dim(), v.len())?;
        let d = self.dim;
        Ok(MarkowitzTangent {
            dgamma: v[0],
            dmu: DVector::from_column_slice(&v[1..1 + d]),
            dsigma: sym_from_vech(&VechVector::new(d, v[1 + d..].to_vec())?),
        })
    }

    pub fn coords_from_tangent(&self, t: &MarkowitzTangent) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.coord_dim());
        out.push(t.dgamma);
        out.extend(t.dmu.iter());
        out.extend(vech(&t.dsigma).into_vec());
        out
    }
}

impl Manifold for MarkowitzSpace {
    type Point = MarkowitzPoint;

    fn coord_dim(&self) -> usize {
        1 + self.dim + vech_len(self.dim)
    }

    fn log(&self, base: &MarkowitzPoint, target: &MarkowitzPoint) -> Result<Vec<f64>> {
        Ok(self.coords_from_tangent(&mrk_log(base, target)?))
    }

    fn exp(&self, base: &MarkowitzPoint, v: &[f64]) -> Result<MarkowitzPoint> {
        mrk_exp(base, &self.tangent_from_coords(v)?)
    }

    fn distance(&self, a: &MarkowitzPoint, b: &MarkowitzPoint) -> Result<f64> {
        mrk_distance(a, b)
    }

    fn tangent_norm(&self, base: &MarkowitzPoint, v: &[f64]) -> Result<f64> {
        let t = self.tangent_from_coords(v)?;
        let s = spd_tangent_norm(&base.sigma, &t.dsigma)?;
        Ok((t.dgamma * t.dgamma + t.dmu.norm_squared() + s * s).sqrt())
    }

    fn ambient_norm(&self, v: &[f64]) -> f64 {
        match self.tangent_from_coords(v) {
            Ok(t) => {
                let s = t.dsigma.frobenius();
                (t.dgamma * t.dgamma + t.dmu.norm_squared() + s * s).sqrt()
            }
            Err(_) => euclid_norm(v),
        }
    }

    fn flatten(&self, p: &MarkowitzPoint) -> Vec<f64> {
        let mut out = vec![p.gamma];
        out.extend(p.mu.iter());
        out.extend(p.sigma.to_row_vec());
        out
    }

    fn unflatten(&self, data: &[f64]) -> Result<MarkowitzPoint> {
        same_dim(self.flat_len(), data.len())?;
        let d = self.dim;
        MarkowitzPoint::new(
            data[0],
            DVector::from_column_slice(&data[1..1 + d]),
            SpdMatrix::from_row_slice(d, &data[1 + d..])?,
        )
    }

    fn flat_len(&self) -> usize {
        1 + self.dim + self.dim * self.dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn min_variance_cases() {
        let w = efficient_weights(0.0, &dvector![0.1, 0.3], &SpdMatrix::identity(2)).unwrap();
        assert!((w.as_slice()[0] - 0.5).abs() < 1e-15);
        let w = efficient_weights(
            0.0,
            &dvector![0.1, 0.3],
            &SpdMatrix::from_diagonal(&[1.0, 2.0]).unwrap(),
        )
        .unwrap();
        assert!((w.as_slice()[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((w.as_slice()[1] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn sym_variant_matches_on_spd() {
        let s = SpdMatrix::from_row_slice(2, &[2.0, 0.3, 0.3, 1.0]).unwrap();
        let mu = dvector![0.02, -0.01];
        let a = efficient_weights(0.7, &mu, &s).unwrap();
        let b = efficient_weights_sym(0.7, &mu, &s.as_sym()).unwrap();
        assert!((a.as_vector() - b.as_vector()).norm() < 1e-13);
    }

    #[test]
    fn markowitz_exp_log_identity() {
        let p = MarkowitzPoint::new(
            0.5,
            dvector![0.1, 0.2],
            SpdMatrix::from_diagonal(&[1.0, 2.0]).unwrap(),
        )
        .unwrap();
        let q = mrk_exp(&p, &MarkowitzTangent::zeros(2)).unwrap();
        assert!(mrk_distance(&p, &q).unwrap() < 1e-14);
        let l = mrk_log(&p, &p).unwrap();
        assert_eq!(l.dgamma, 0.0);
        assert!(l.dsigma.frobenius() < 1e-14);
        assert!(MarkowitzPoint::new(0.0, dvector![0.0], SpdMatrix::identity(2)).is_err());
    }
}
