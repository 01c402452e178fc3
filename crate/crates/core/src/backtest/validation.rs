//! Window selection on a calibration prefix.

use nalgebra::DMatrix;

use super::benchmark::{forecast_all, BenchmarkConfig, Method};
use super::metrics::matrix_errors;
use super::prices::PricePanel;
use super::rolling::{log_returns, rolling_cov};
use crate::error::{GeoError, Result};

/// Runs the EUC forecaster for each candidate window on the first `split`
/// fraction of the returns and picks the window with the smallest mean
/// Frobenius error; ties go to the smaller window.
///
/// Windows produce different observation series, so every candidate is
/// scored against the same realized target `r_{t+1} r_{t+1}ᵀ` on the same
/// dates.
pub fn sequential_validation(
    panel: &PricePanel,
    grid: &[usize],
    split: f64,
    cfg: &BenchmarkConfig,
) -> Result<usize> {
    if grid.is_empty() {
        return Err(GeoError::InvalidInput("empty window grid".into()));
    }
    if !(split > 0.0 && split <= 1.0) {
        return Err(GeoError::InvalidInput("split must lie in (0, 1]".into()));
    }
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let returns = log_returns(panel);
    let calib = ((split * returns.len() as f64).ceil() as usize).min(returns.len());
    let w_max = *grid.last().expect("nonempty");
    let first = w_max - 1 + cfg.warmup;
    if first + 1 >= calib {
        return Err(GeoError::InvalidInput(format!(
            "calibration prefix of {calib} returns too short for window {w_max} and warmup {}",
            cfg.warmup
        )));
    }
    let euc_cfg = BenchmarkConfig {
        methods: vec![Method::Euc],
        ..cfg.clone()
    };
    let mut best: Option<(f64, usize)> = None;
    for &w in &grid {
        let series = rolling_cov(panel, w)?;
        // series index j sits at return index w − 1 + j
        let prefix = series.prefix(calib - (w - 1));
        let fc = forecast_all(&prefix, &euc_cfg)?;
        let fc = &fc[0].1;
        let mut total = 0.0;
        for t in first..calib - 1 {
            let r = &returns[t + 1];
            let target = DMatrix::from_fn(r.len(), r.len(), |i, j| r[i] * r[j]);
            total += matrix_errors(&fc[t + 1 - w], &target)?.frobenius;
        }
        let score = total / (calib - 1 - first) as f64;
        if best.is_none_or(|(s, _)| score < s) {
            best = Some((score, w));
        }
    }
    Ok(best.expect("nonempty grid").1)
}
