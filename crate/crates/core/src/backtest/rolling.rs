//! Rolling-window covariance observations from log-returns.

use chrono::NaiveDate;
use nalgebra::DMatrix;

use super::prices::PricePanel;
use crate::error::{GeoError, Result};
use crate::sym::{sym_eigen, SpdMatrix, SymMatrix};

const JITTER_REL: f64 = 1e-10;
const JITTER_FLOOR: f64 = 1e-14;

/// One covariance observation per date, with the trailing mean log-return
/// of the same window.
#[derive(Debug, Clone)]
pub struct CovObservationSeries {
    pub dates: Vec<NaiveDate>,
    pub observations: Vec<SpdMatrix>,
    pub mean_returns: Vec<Vec<f64>>,
    /// Log-return on each date, used as a common target across windows.
    pub returns: Vec<Vec<f64>>,
    /// Known true covariance per date (simulated data only). When present it
    /// replaces the next observation as the forecast target.
    pub truth: Option<Vec<SpdMatrix>>,
}

impl CovObservationSeries {
    /// Wraps bare observations (e.g. simulated ones) with zero mean returns
    /// and consecutive calendar dates.
    pub fn from_points(observations: Vec<SpdMatrix>) -> Result<Self> {
        let d = observations
            .first()
            .ok_or_else(|| GeoError::InvalidInput("empty observation series".into()))?
            .dim();
        if observations.iter().any(|o| o.dim() != d) {
            return Err(GeoError::InvalidInput(
                "observations differ in dimension".into(),
            ));
        }
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let n = observations.len();
        Ok(CovObservationSeries {
            dates: start.iter_days().take(n).collect(),
            observations,
            mean_returns: vec![vec![0.0; d]; n],
            returns: vec![vec![0.0; d]; n],
            truth: None,
        })
    }

    pub fn with_truth(mut self, truth: Vec<SpdMatrix>) -> Result<Self> {
        if truth.len() != self.len() {
            return Err(GeoError::DimensionMismatch {
                expected: self.len(),
                got: truth.len(),
            });
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.observations.first().map_or(0, |o| o.dim())
    }

    /// The first `n` entries.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.len());
        CovObservationSeries {
            dates: self.dates[..n].to_vec(),
            observations: self.observations[..n].to_vec(),
            mean_returns: self.mean_returns[..n].to_vec(),
            returns: self.returns[..n].to_vec(),
            truth: self.truth.as_ref().map(|t| t[..n].to_vec()),
        }
    }
}

/// `r_t = log(p_t / p_{t−1})`, one row per date after the first.
pub fn log_returns(panel: &PricePanel) -> Vec<Vec<f64>> {
    panel
        .prices()
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| (a / b).ln()).collect())
        .collect()
}

/// Sample covariance (divisor `n − 1`) of the rows of `r`, plus their mean.
pub fn sample_cov(r: &[Vec<f64>]) -> (DMatrix<f64>, Vec<f64>) {
    let n = r.len();
    let d = r[0].len();
    let mut mean = vec![0.0; d];
    for row in r {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut c = DMatrix::zeros(d, d);
    for row in r {
        for i in 0..d {
            for j in i..d {
                c[(i, j)] += (row[i] - mean[i]) * (row[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            c[(i, j)] /= (n - 1) as f64;
            c[(j, i)] = c[(i, j)];
        }
    }
    (c, mean)
}

/// Adds `ε·I`, `ε = max(1e-10·trace, 1e-14)`, when `λ_min < ε`.
pub fn jitter(c: DMatrix<f64>) -> Result<SpdMatrix> {
    let eps = (JITTER_REL * c.trace()).max(JITTER_FLOOR);
    let s = SymMatrix::new(c)?;
    let (_, lambda) = sym_eigen(&s)?;
    let min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    if min < eps {
        let d = s.dim();
        let m = s.into_matrix() + DMatrix::identity(d, d) * eps;
        return SpdMatrix::new(m);
    }
    SpdMatrix::try_from_sym(s)
}

/// Covariance of the trailing `window` log-returns at every date where a
/// full window is available. The observation dated `t` uses returns up to
/// and including `t`.
pub fn rolling_cov(panel: &PricePanel, window: usize) -> Result<CovObservationSeries> {
    if window < 2 {
        return Err(GeoError::InvalidInput("window must be at least 2".into()));
    }
    let returns = log_returns(panel);
    if window > returns.len() {
        return Err(GeoError::WindowTooLarge {
            window,
            available: returns.len(),
        });
    }
    let mut out = CovObservationSeries {
        dates: Vec::new(),
        observations: Vec::new(),
        mean_returns: Vec::new(),
        returns: Vec::new(),
        truth: None,
    };
    for end in window..=returns.len() {
        let (c, mean) = sample_cov(&returns[end - window..end]);
        out.dates.push(panel.dates()[end]);
        out.observations.push(jitter(c)?);
        out.mean_returns.push(mean);
        out.returns.push(returns[end - 1].clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(prices: Vec<Vec<f64>>) -> PricePanel {
        let start = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
        let dates = start.iter_days().take(prices.len()).collect();
        let tickers = (0..prices[0].len()).map(|i| format!("T{i}")).collect();
        PricePanel::new(dates, tickers, prices).unwrap()
    }

    #[test]
    fn constant_prices_give_floor_jitter() {
        let s = rolling_cov(&panel(vec![vec![10.0, 20.0]; 12]), 5).unwrap();
        assert_eq!(s.len(), 7);
        for o in &s.observations {
            assert_eq!(o.matrix(), &(DMatrix::identity(2, 2) * JITTER_FLOOR));
        }
    }

    #[test]
    fn two_sample_window_closed_form() {
        // returns alternate (+1, +1) and (−1, −1)
        let e = std::f64::consts::E;
        let prices: Vec<Vec<f64>> = (0..6)
            .map(|t| {
                if t % 2 == 0 {
                    vec![1.0, 1.0]
                } else {
                    vec![e, e]
                }
            })
            .collect();
        let s = rolling_cov(&panel(prices), 2).unwrap();
        for o in &s.observations {
            // two samples ±1: variance (1 + 1)/1 = 2, perfectly correlated, plus jitter
            let m = o.matrix();
            let eps = JITTER_REL * 4.0;
            assert!((m[(0, 0)] - 2.0 - eps).abs() < 1e-12);
            assert!((m[(0, 1)] - 2.0).abs() < 1e-12);
        }
        for mu in &s.mean_returns {
            assert!(mu.iter().all(|x| x.abs() < 1e-15));
        }
    }

    #[test]
    fn window_errors() {
        let p = panel(vec![vec![1.0, 2.0]; 5]);
        assert!(matches!(
            rolling_cov(&p, 5),
            Err(GeoError::WindowTooLarge {
                window: 5,
                available: 4
            })
        ));
        assert!(rolling_cov(&p, 1).is_err());
        assert_eq!(rolling_cov(&p, 4).unwrap().len(), 1);
    }
}
