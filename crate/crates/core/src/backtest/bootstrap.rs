//! Bias-corrected and accelerated (BCa) bootstrap for the mean.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{GeoError, Result};

const MIN_SAMPLE: usize = 10;
const MIN_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapCI {
    pub statistic: String,
    pub estimate: f64,
    pub lower95: f64,
    pub upper95: f64,
    pub resamples: usize,
    pub seed: u64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Linear interpolation between order statistics at `p·(B − 1)`.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Resample means, resample `b` drawn from ChaCha8 stream `b` of `seed`.
pub fn resample_means(sample: &[f64], resamples: usize, seed: u64) -> Vec<f64> {
    let n = sample.len();
    (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut acc = 0.0;
            for _ in 0..n {
                acc += sample[rng.random_range(0..n)];
            }
            acc / n as f64
        })
        .collect()
}

/// Jackknife acceleration `Σd³ / (6 (Σd²)^{3/2})`, `d_i = θ̄ − θ_(i)`.
fn acceleration(sample: &[f64]) -> f64 {
    let n = sample.len() as f64;
    let total: f64 = sample.iter().sum();
    let loo: Vec<f64> = sample.iter().map(|x| (total - x) / (n - 1.0)).collect();
    let bar = mean(&loo);
    let (s2, s3) = loo.iter().fold((0.0, 0.0), |(s2, s3), t| {
        let d = bar - t;
        (s2 + d * d, s3 + d * d * d)
    });
    if s2 == 0.0 {
        0.0
    } else {
        s3 / (6.0 * s2.powf(1.5))
    }
}

/// Two-sided `1 − alpha` BCa interval for the mean. A constant sample gives
/// the point interval `[c, c]`.
pub fn bca_bootstrap(
    sample: &[f64],
    resamples: usize,
    alpha: f64,
    seed: u64,
) -> Result<BootstrapCI> {
    if sample.len() < MIN_SAMPLE {
        return Err(GeoError::InvalidInput(format!(
            "bootstrap needs at least {MIN_SAMPLE} values, got {}",
            sample.len()
        )));
    }
    if resamples < MIN_RESAMPLES {
        return Err(GeoError::InvalidInput(format!(
            "bootstrap needs at least {MIN_RESAMPLES} resamples, got {resamples}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GeoError::InvalidInput("alpha must lie in (0, 1)".into()));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(GeoError::InvalidInput("non-finite sample value".into()));
    }
    let est = mean(sample);
    let ci = |lower95, upper95| BootstrapCI {
        statistic: "mean".into(),
        estimate: est,
        lower95,
        upper95,
        resamples,
        seed,
    };
    if sample.iter().all(|&x| x == sample[0]) {
        return Ok(ci(sample[0], sample[0]));
    }
    let mut boot = resample_means(sample, resamples, seed);
    boot.sort_by(f64::total_cmp);
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let below = boot.iter().filter(|&&t| t < est).count() as f64;
    let b = resamples as f64;
    let z0 = std.inverse_cdf((below / b).clamp(0.5 / b, 1.0 - 0.5 / b));
    let a = acceleration(sample);
    let adjusted = |z: f64| {
        let s = z0 + z;
        std.cdf(z0 + s / (1.0 - a * s))
    };
    let zl = std.inverse_cdf(alpha / 2.0);
    let lower = quantile(&boot, adjusted(zl));
    let upper = quantile(&boot, adjusted(-zl));
    if !(lower <= est && est <= upper) {
        return Err(GeoError::IntervalOrder {
            lower,
            point: est,
            upper,
        });
    }
    Ok(ci(lower, upper))
}
