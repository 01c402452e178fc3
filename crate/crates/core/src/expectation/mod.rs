//! Conditional expectations of manifold-valued paths on finite filtered
//! models.
//!
//! The filtration is a refining sequence of atom partitions, so every
//! conditional expectation is a weighted average (or weighted Fréchet mean)
//! over a cell.

pub mod bundled;
pub mod ce;
pub mod gamma;
pub mod model;
pub mod verify;

pub use ce::{
    conditional_tangent_mean, frechet_initial, geodesic_ce, geodesic_ce_cells, horizontal_extend,
    intrinsic_ce, path_value_at, CellPath, CellValues,
};
pub use gamma::{gamma_f, gamma_fn, gamma_limit_identity_check, GammaCheckOptions, GammaReport};
pub use model::{AnyModel, DiscreteModel, GeometrySpec, ManifoldPath, ModelFile, Partition};
pub use verify::{
    bundled_models, convergence_check, euclidean_reduction_check, gamma_check, verify_model,
    CheckOutcome, VerifyOptions,
};
