//! Diagonal linear-Gaussian state-space parameters.

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

/// One tangent coordinate: `dX = A X du + C dB`, `dY = H X du + K dW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordParams {
    pub a: f64,
    pub c: f64,
    pub h: f64,
    pub k: f64,
}

impl CoordParams {
    pub fn new(a: f64, c: f64, h: f64, k: f64) -> Result<Self> {
        let p = CoordParams { a, c, h, k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.a, self.c, self.h, self.k]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(GeoError::InvalidInput(
                "non-finite state-space parameter".into(),
            ));
        }
        if self.c < 0.0 || self.k < 0.0 {
            return Err(GeoError::InvalidInput(
                "noise scales must be nonnegative".into(),
            ));
        }
        if self.h == 0.0 {
            return Err(GeoError::InvalidInput(
                "observation gain must be nonzero".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsmParams {
    pub coords: Vec<CoordParams>,
    pub dt: f64,
}

impl SsmParams {
    pub fn new(coords: Vec<CoordParams>, dt: f64) -> Result<Self> {
        let p = SsmParams { coords, dt };
        p.validate()?;
        Ok(p)
    }

    /// Same scalar model on every coordinate.
    pub fn uniform(d: usize, coord: CoordParams, dt: f64) -> Result<Self> {
        Self::new(vec![coord; d], dt)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(GeoError::InvalidInput("time step must be positive".into()));
        }
        if self.coords.is_empty() {
            return Err(GeoError::InvalidInput("no coordinates".into()));
        }
        self.coords.iter().try_for_each(|c| c.validate())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(GeoError::DimensionMismatch {
                expected: self.dim(),
                got: d,
            });
        }
        Ok(())
    }
}
