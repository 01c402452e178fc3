//! Seeded synthetic price panels with slowly varying covariance.

use chrono::{Datelike, NaiveDate, Weekday};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::prices::PricePanel;
use crate::error::{GeoError, Result};
use crate::filter::{simulate_ssm, CoordParams, SsmParams};
use crate::manifold::{Manifold, SpdManifold};
use crate::sym::SpdMatrix;

/// `n` consecutive business days starting at `start` (or the next one).
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    start
        .iter_days()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .take(n)
        .collect()
}

/// Daily covariance with 1.5% to 2% volatilities and pairwise correlation 0.4.
pub fn base_covariance(d: usize) -> Result<SpdMatrix> {
    let vols: Vec<f64> = (0..d)
        .map(|i| 0.015 + 0.005 * i as f64 / (d.max(2) - 1) as f64)
        .collect();
    SpdMatrix::new(DMatrix::from_fn(d, d, |i, j| {
        let rho = if i == j { 1.0 } else { 0.4 };
        rho * vols[i] * vols[j]
    }))
}

/// Prices for `d` assets over `days` dates. The latent daily covariance
/// follows the tangent-coordinate state-space model from
/// [`base_covariance`] with per-step moves of about 0.2% of its scale;
/// log-returns are Gaussian given the covariance.
pub fn synthetic_prices(d: usize, days: usize, seed: u64) -> Result<PricePanel> {
    if d == 0 || days < 2 {
        return Err(GeoError::InvalidInput(
            "need at least one asset and two days".into(),
        ));
    }
    let base = base_covariance(d)?;
    let scale = base.matrix().trace() / d as f64;
    let coord = CoordParams::new(-0.5, 0.002 * scale, 1.0, 0.002 * scale)?;
    let m = SpdManifold::new(d);
    let params = SsmParams::uniform(m.coord_dim(), coord, 1.0)?;
    let path = simulate_ssm(&m, &params, &base, days - 1, seed)?.latent;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut prices = Vec::with_capacity(days);
    let mut last = DVector::from_element(d, 100.0);
    prices.push(last.as_slice().to_vec());
    for sigma in &path[1..] {
        let chol =
            sigma.matrix().clone().cholesky().ok_or_else(|| {
                GeoError::InvalidInput("latent covariance lost definiteness".into())
            })?;
        let z = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        let r = chol.l() * z;
        last = last.zip_map(&r, |p, x| p * x.exp());
        prices.push(last.as_slice().to_vec());
    }
    let start = NaiveDate::from_ymd_opt(2014, 9, 8).expect("valid date");
    let tickers = (1..=d).map(|i| format!("SYN{i}")).collect();
    PricePanel::new(business_days(start, days), tickers, prices)
}
