//! State-space filtering of manifold-valued signals.
//!
//! Each tangent coordinate follows an independent scalar linear-Gaussian
//! model. The non-Euclidean filter reads observations in the chart at its
//! previous estimate, runs the scalar Kalman recursions, and maps back with
//! `Exp`.

pub mod kalman;
pub mod mle;
pub mod nkf;
pub mod params;
pub mod sde;
pub mod simulate;

pub use kalman::{kalman_step, riccati_steady_state, scalar_kalman_step, ScalarState};
pub use mle::{implied_lag1_autocorr, mle_fit, MleFit};
pub use nkf::{fixed_anchor_filter, nkf_step, run_nkf, CarryMode, FilterRun, FilterState};
pub use params::{CoordParams, SsmParams};
pub use sde::sde_filter_euler;
pub use simulate::{simulate_ssm, simulate_ssm_from, write_long_csv, SimOutput};
