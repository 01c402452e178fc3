use geocond::expectation::bundled::{
    deterministic_spd_model, euclidean8_model, r1_model, spd8_model,
};
use geocond::expectation::*;
use geocond::manifold::Manifold;
use geocond::spd::spd_distance;
use geocond::sym::SpdMatrix;
use geocond::{EuclideanSpace, SpdManifold};
use proptest::prelude::*;

fn conditional_means(model: &DiscreteModel<EuclideanSpace>, k: usize) -> Vec<Vec<f64>> {
    model
        .partition(k)
        .cells()
        .iter()
        .map(|cell| {
            let tot: f64 = cell.iter().map(|&a| model.probs()[a]).sum();
            let d = model.point(cell[0], k).len();
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

#[test]
fn euclidean_reduction_any_substeps() {
    let model = euclidean8_model(3, 11);
    for s in [1, 2, 5, 16] {
        let z = geodesic_ce_cells(&model, s).unwrap();
        for k in 0..model.n_times() {
            let want = conditional_means(&model, k);
            for (got, w) in z.cells[k].iter().zip(&want) {
                for (g, x) in got.iter().zip(w) {
                    assert!((g - x).abs() < 1e-12, "k={k} s={s}: {g} vs {x}");
                }
            }
        }
    }
}

#[test]
fn intrinsic_ce_euclidean_is_mean() {
    let model = euclidean8_model(2, 3);
    for k in 0..model.n_times() {
        let got = intrinsic_ce(&model, k, 1e-13).unwrap();
        for (g, w) in got.values.iter().zip(conditional_means(&model, k)) {
            assert!((g[0] - w[0]).abs() < 1e-12 && (g[1] - w[1]).abs() < 1e-12);
        }
    }
}

#[test]
fn intrinsic_ce_spd_first_order_residual() {
    let model = spd8_model(5);
    let m = model.manifold();
    for k in 0..model.n_times() {
        let tol = 1e-11;
        let cells = intrinsic_ce(&model, k, tol).unwrap();
        let tangents = conditional_tangent_mean(&model, k, &cells).unwrap();
        for t in tangents {
            assert!(m.ambient_norm(&t) < tol);
        }
    }
}

#[test]
fn geodesic_ce_approaches_intrinsic_as_substeps_double() {
    let model = spd8_model(5);
    let last = model.n_times() - 1;
    let target = intrinsic_ce(&model, last, 1e-13).unwrap();
    let diam = model.diameter().unwrap();
    let mut errs = Vec::new();
    for s in [1, 2, 4, 8, 16, 32, 64] {
        let z = geodesic_ce_cells(&model, s).unwrap();
        let e = z.cells[last]
            .iter()
            .zip(&target.values)
            .map(|(a, b)| spd_distance(a, b).unwrap())
            .fold(0.0, f64::max);
        errs.push(e);
    }
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "{errs:?}");
    }
    assert!(errs[6] <= 1e-2 * diam, "{errs:?} diam {diam}");
}

#[test]
fn geodesic_ce_is_adapted() {
    let model = spd8_model(17);
    let z = geodesic_ce(&model, 4).unwrap();
    assert!(model.is_adapted(&z));
}

#[test]
fn deterministic_model_reproduces_path() {
    let model = deterministic_spd_model(2);
    let z = geodesic_ce(&model, 3).unwrap();
    for k in 0..model.n_times() {
        assert!(spd_distance(z.at(0, k), model.point(0, k)).unwrap() < 1e-10);
    }
    let r = gamma_limit_identity_check(&model, &GammaCheckOptions::default()).unwrap();
    assert!(r.min_f < 1e-18);
    assert!(r.inf_fn.iter().all(|&(_, v)| v < 1e-18));
}

#[test]
fn two_point_frechet_initial_is_midpoint() {
    let m = SpdManifold::new(2);
    let a = SpdMatrix::from_row_slice(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
    let b = SpdMatrix::from_row_slice(2, &[0.5, -0.1, -0.1, 3.0]).unwrap();
    let model = DiscreteModel::new(
        m,
        vec!["a".into(), "b".into()],
        vec![0.5, 0.5],
        vec![0.0],
        vec![Partition::discrete(2)],
        vec![vec![a.clone()], vec![b.clone()]],
    )
    .unwrap();
    let x = frechet_initial(&model).unwrap();
    // line search for the minimizer of the two-point objective along the geodesic
    let f = |t: f64| {
        let p = m.geodesic(&a, &b, t).unwrap();
        spd_distance(&p, &a).unwrap().powi(2) + spd_distance(&p, &b).unwrap().powi(2)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let oracle = m.geodesic(&a, &b, 0.5 * (lo + hi)).unwrap();
    assert!(spd_distance(&x, &oracle).unwrap() < 1e-7);
}

#[test]
fn gamma_f_and_fn_identities() {
    let model = spd8_model(5);
    let m = model.manifold();
    assert_eq!(gamma_f(&model, model.path(), 2.0).unwrap(), 0.0);
    // Z constant in time: F_n equals F exactly
    let c = m
        .geodesic(model.point(0, 0), model.point(3, 2), 0.4)
        .unwrap();
    let z = ManifoldPath {
        times: model.times().to_vec(),
        values: vec![vec![c; model.n_times()]; model.n_atoms()],
    };
    let f = gamma_f(&model, &z, 2.0).unwrap();
    for n in [1, 4, 64] {
        let fnv = gamma_fn(&model, &z, n, 2.0).unwrap();
        assert!((fnv - f).abs() <= 1e-12 * f, "{fnv} vs {f}");
    }
}

#[test]
fn gamma_fn_converges_on_smooth_path() {
    let model = spd8_model(5);
    let z = geodesic_ce(&model, 8).unwrap();
    let f = gamma_f(&model, &z, 2.0).unwrap();
    let gaps: Vec<f64> = (0..=10)
        .map(|j| (gamma_fn(&model, &z, 1 << j, 2.0).unwrap() - f).abs())
        .collect();
    for w in gaps.windows(2) {
        assert!(w[1] < w[0], "{gaps:?}");
    }
    assert!(gaps[10] < 1e-3 * f, "{gaps:?} F={f}");
}

/// Enumerates every path of the candidate family directly.
fn brute_force_min_f(model: &DiscreteModel<EuclideanSpace>, levels: usize) -> f64 {
    let m = model.manifold();
    let w = [0.5, 1.0, 0.5];
    let mut slots: Vec<(usize, Vec<usize>, Vec<Vec<f64>>)> = Vec::new();
    for k in 0..model.n_times() {
        let means = intrinsic_ce(model, k, 1e-14).unwrap();
        for (cell, mean) in model.partition(k).cells().iter().zip(means.values) {
            let mut cands = vec![mean.clone()];
            for &a in cell {
                for j in 1..=levels {
                    cands.push(
                        m.geodesic(&mean, model.point(a, k), j as f64 / levels as f64)
                            .unwrap(),
                    );
                }
            }
            slots.push((k, cell.clone(), cands));
        }
    }
    let mut idx = vec![0usize; slots.len()];
    let mut best = f64::INFINITY;
    loop {
        let mut total = 0.0;
        for (s, (k, cell, cands)) in slots.iter().enumerate() {
            for &a in cell {
                total +=
                    w[*k] * model.probs()[a] * (cands[idx[s]][0] - model.point(a, *k)[0]).powi(2);
            }
        }
        best = best.min(total);
        let mut i = 0;
        loop {
            if i == slots.len() {
                return best;
            }
            idx[i] += 1;
            if idx[i] < slots[i].2.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn gamma_check_r1_matches_exhaustive_search() {
    let model = r1_model(9);
    let r = gamma_limit_identity_check(&model, &GammaCheckOptions::default()).unwrap();
    let oracle = brute_force_min_f(&model, 2);
    assert!((r.min_f - oracle).abs() < 1e-12);
    // conditional means attain the minimum
    let cells: Vec<Vec<Vec<f64>>> = (0..model.n_times())
        .map(|k| intrinsic_ce(&model, k, 1e-14).unwrap().values)
        .collect();
    let z = ManifoldPath::from_cells(
        model.times().to_vec(),
        model.partitions(),
        &cells,
        model.n_atoms(),
    );
    assert!((gamma_f(&model, &z, 2.0).unwrap() - r.min_f).abs() < 1e-12);
    assert!(r.terminal_rel_gap < 1e-9);
}

#[test]
fn gamma_check_spd8_terminal_gap() {
    let model = spd8_model(5);
    let r = gamma_limit_identity_check(&model, &GammaCheckOptions::default()).unwrap();
    assert!(r.terminal_rel_gap < 5e-2, "{r:?}");
}

#[test]
fn model_files_round_trip() {
    let any = AnyModel::Spd(spd8_model(1));
    let back = AnyModel::from_json(&any.to_json()).unwrap();
    assert_eq!(back.to_file_data(), any.to_file_data());
}

proptest! {
    #[test]
    fn extension_is_idempotent(seed in 0u64..500, t in -1.0f64..7.0) {
        let model = spd8_model(seed);
        let m = model.manifold();
        let once = horizontal_extend(m, model.path(), t).unwrap();
        let twice = horizontal_extend(m, &once, t).unwrap();
        prop_assert_eq!(&once, &twice);
        for a in 0..model.n_atoms() {
            for (k, &s) in model.times().iter().enumerate() {
                let j = once.times.iter().position(|&x| x == s).unwrap();
                if s < t {
                    prop_assert_eq!(once.at(a, j), model.point(a, k));
                } else {
                    prop_assert_eq!(once.at(a, j), &path_value_at(m, model.path(), a, t).unwrap());
                }
            }
        }
    }

    #[test]
    fn gamma_f_zero_iff_equal(seed in 0u64..200, atom in 0usize..8, k in 0usize..6) {
        let model = spd8_model(seed);
        let mut z = model.path().clone();
        prop_assert_eq!(gamma_f(&model, &z, 2.0).unwrap(), 0.0);
        let bumped = model.manifold().exp(z.at(atom, k), &[1e-3, 0.0, 0.0]).unwrap();
        z.values[atom][k] = bumped;
        prop_assert!(gamma_f(&model, &z, 2.0).unwrap() > 0.0);
    }

    #[test]
    fn euclidean_tangent_mean_is_mean_minus_anchor(seed in 0u64..300, k in 1usize..6) {
        let model = euclidean8_model(2, seed);
        let anchors = CellValues { time_index: k - 1, values: conditional_means(&model, k - 1) };
        let t = conditional_tangent_mean(&model, k, &anchors).unwrap();
        let means = conditional_means(&model, k);
        let parents = model.parent_cells(k);
        for (c, v) in t.iter().enumerate() {
            for i in 0..2 {
                let want = means[c][i] - anchors.values[parents[c]][i];
                prop_assert!((v[i] - want).abs() < 1e-12);
            }
        }
    }
}
