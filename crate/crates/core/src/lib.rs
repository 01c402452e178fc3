//! Geodesic conditional expectation and non-Euclidean Kalman filtering on
//! the SPD cone and the Markowitz space.
//!
//! Layers, bottom-up:
//! - [`sym`]: eigendecomposition-based matrix functions and vech coordinates.
//! - [`spd`], [`markowitz`], [`manifold`]: geometry of the state spaces.
//! - [`expectation`]: geodesic and intrinsic conditional expectation on
//!   finite models, plus the Γ-convergence functionals.
//! - [`filter`]: simulator, scalar Kalman machinery, the manifold filters.
//! - [`backtest`]: covariance-forecasting benchmark and bootstrap intervals.

pub mod backtest;
pub mod error;
pub mod expectation;
pub mod filter;
pub mod manifold;
pub mod markowitz;
pub mod spd;
pub mod sym;

pub use error::{GeoError, Result};
pub use manifold::{EuclideanSpace, Manifold, SpdManifold};
pub use markowitz::{MarkowitzPoint, MarkowitzSpace};
pub use sym::{SpdMatrix, SymMatrix, VechVector};
