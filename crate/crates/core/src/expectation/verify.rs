//! Pass/fail invariant checks over bundled or user-supplied models.

use crate::error::Result;
use crate::manifold::{EuclideanSpace, Manifold};

use super::ce::{geodesic_ce_cells, intrinsic_ce};
use super::gamma::{gamma_limit_identity_check, GammaCheckOptions};
use super::model::{AnyModel, DiscreteModel};

pub const REDUCTION_TOL: f64 = 1e-12;
pub const CONVERGENCE_REL_TOL: f64 = 1e-2;
pub const GAMMA_REL_TOL: f64 = 5e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub reduction_substeps: Vec<usize>,
    pub fine_substeps: usize,
    pub gamma: GammaCheckOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            reduction_substeps: vec![1, 4, 64],
            fine_substeps: 64,
            gamma: GammaCheckOptions::default(),
        }
    }
}

fn cell_means(model: &DiscreteModel<EuclideanSpace>, k: usize) -> Vec<Vec<f64>> {
    let d = model.manifold().coord_dim();
    model
        .partition(k)
        .cells()
        .iter()
        .map(|cell| {
            let tot: f64 = cell.iter().map(|&a| model.probs()[a]).sum();
            (0..d)
                .map(|i| {
                    cell.iter()
                        .map(|&a| model.probs()[a] * model.point(a, k)[i])
                        .sum::<f64>()
                        / tot
                })
                .collect()
        })
        .collect()
}

/// Largest deviation of the geodesic CE from the cell means, over times,
/// cells and every substep count.
pub fn euclidean_reduction_check(
    model: &DiscreteModel<EuclideanSpace>,
    substeps: &[usize],
) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for &s in substeps {
        let z = geodesic_ce_cells(model, s)?;
        for k in 0..model.n_times() {
            for (got, want) in z.cells[k].iter().zip(cell_means(model, k)) {
                for (g, w) in got.iter().zip(&want) {
                    worst = worst.max((g - w).abs());
                    scale = scale.max(w.abs());
                }
            }
        }
    }
    let tol = REDUCTION_TOL * (1.0 + scale);
    Ok(CheckOutcome {
        name: "euclidean reduction".into(),
        passed: worst <= tol,
        detail: format!(
            "max |geodesic CE - E[X|F]| = {worst:.3e} (tol {tol:.1e}, substeps {substeps:?})"
        ),
    })
}

/// Terminal-time distance between the geodesic CE and the intrinsic CE.
pub fn terminal_ce_distance<M: Manifold>(model: &DiscreteModel<M>, substeps: usize) -> Result<f64> {
    let last = model.n_times() - 1;
    let target = intrinsic_ce(model, last, 1e-13)?;
    let z = geodesic_ce_cells(model, substeps)?;
    let m = model.manifold();
    let mut worst = 0.0f64;
    for (a, b) in z.cells[last].iter().zip(&target.values) {
        worst = worst.max(m.distance(a, b)?);
    }
    Ok(worst)
}

/// The fine-substep distance must not exceed the single-step one and must be
/// within `1e-2` of the model diameter.
pub fn convergence_check<M: Manifold>(
    model: &DiscreteModel<M>,
    fine: usize,
) -> Result<CheckOutcome> {
    let coarse = terminal_ce_distance(model, 1)?;
    let fine_d = terminal_ce_distance(model, fine)?;
    let diam = model.diameter()?;
    let bound = CONVERGENCE_REL_TOL * diam;
    Ok(CheckOutcome {
        name: "geodesic vs intrinsic CE".into(),
        // roundoff slack for models where both distances are already at machine precision
        passed: fine_d <= coarse + REDUCTION_TOL * (1.0 + diam) && fine_d <= bound,
        detail: format!("d(s=1) = {coarse:.3e}, d(s={fine}) = {fine_d:.3e}, bound {bound:.3e}"),
    })
}

fn is_deterministic<M: Manifold>(model: &DiscreteModel<M>) -> bool {
    let m = model.manifold();
    (0..model.n_times()).all(|k| {
        let first = m.flatten(model.point(0, k));
        (1..model.n_atoms()).all(|a| m.flatten(model.point(a, k)) == first)
    })
}

/// `|min F − inf F_n| / (1 + min F)` at the end of the schedule; a model with
/// a single path must give exactly zero on both sides.
pub fn gamma_check<M: Manifold>(
    model: &DiscreteModel<M>,
    opts: &GammaCheckOptions,
) -> Result<CheckOutcome> {
    let r = gamma_limit_identity_check(model, opts)?;
    let (n, last) = r.inf_fn.last().copied().unwrap_or((0, f64::NAN));
    let rel = (r.min_f - last).abs() / (1.0 + r.min_f);
    let (passed, rule) = if is_deterministic(model) {
        (r.min_f == 0.0 && last == 0.0, "exact 0".to_string())
    } else {
        (rel < GAMMA_REL_TOL, format!("< {GAMMA_REL_TOL:.0e}"))
    };
    Ok(CheckOutcome {
        name: "gamma-limit identity".into(),
        passed,
        detail: format!(
            "min F = {:.6e}, inf F_n(n={n}) = {last:.6e}, rel gap {rel:.3e} ({rule})",
            r.min_f
        ),
    })
}

/// All checks that apply to the model's geometry.
pub fn verify_model(model: &AnyModel, opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    Ok(match model {
        AnyModel::Euclidean(m) => vec![
            euclidean_reduction_check(m, &opts.reduction_substeps)?,
            convergence_check(m, opts.fine_substeps)?,
            gamma_check(m, &opts.gamma)?,
        ],
        AnyModel::Spd(m) => vec![
            convergence_check(m, opts.fine_substeps)?,
            gamma_check(m, &opts.gamma)?,
        ],
        AnyModel::Markowitz(m) => vec![
            convergence_check(m, opts.fine_substeps)?,
            gamma_check(m, &opts.gamma)?,
        ],
    })
}

/// The bundled models with their display names.
pub fn bundled_models() -> Vec<(String, AnyModel)> {
    use super::bundled::*;
    vec![
        (
            "euclidean8-d3".into(),
            AnyModel::Euclidean(euclidean8_model(3, 11)),
        ),
        ("r1".into(), AnyModel::Euclidean(r1_model(3))),
        ("spd8".into(), AnyModel::Spd(spd8_model(5))),
        (
            "deterministic-spd".into(),
            AnyModel::Spd(deterministic_spd_model(2)),
        ),
    ]
}
