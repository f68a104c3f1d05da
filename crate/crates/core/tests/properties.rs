mod common;

use common::{random_ratings, Dense};
use proptest::prelude::*;
use rne_core::baselines::blind::blind_regression_predict;
use rne_core::baselines::cf::{cf_neighborhood, cf_predict, CfAxis, CfOptions};
use rne_core::baselines::soft_impute::{accept_unconverged, soft_impute, SoftImputeOptions};
use rne_core::ratings::SparseRatings;
use rne_core::rne::{Bandwidths, OneSided, RneConfig, RneModel};

fn small_problem() -> impl Strategy<Value = (SparseRatings, usize, usize)> {
    (3usize..10, 3usize..10, 0.3f64..0.9, any::<u64>()).prop_flat_map(|(n, m, p, seed)| {
        let r = random_ratings(n, m, p, seed);
        (Just(r), 0..n, 0..m)
    })
}

fn bandwidths() -> impl Strategy<Value = Bandwidths> {
    (0.1f64..5.0, 0.1f64..5.0).prop_map(|(a, b)| Bandwidths::new(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rne_shift_equivariant((r, u, i) in small_problem(), h in bandwidths(), c in -50.0f64..50.0) {
        prop_assume!(!r.is_empty());
        let cfg = RneConfig::default();
        let shifted = r.map_values(|a| a + c);
        let a = RneModel::fit(&r, &cfg).unwrap().predict(u, i, h).unwrap().value;
        let b = RneModel::fit(&shifted, &cfg).unwrap().predict(u, i, h).unwrap().value;
        match (a, b) {
            (Some(a), Some(b)) => prop_assert!((b - a - c).abs() <= 1e-9 * (1.0 + c.abs())),
            (None, None) => {}
            other => prop_assert!(false, "NA mismatch {other:?}"),
        }
    }

    #[test]
    fn rne_scale_equivariant((r, u, i) in small_problem(), h in bandwidths(), s in 0.1f64..20.0) {
        prop_assume!(!r.is_empty());
        let cfg = RneConfig::default();
        let scaled = r.map_values(|a| a * s);
        let hs = Bandwidths::new(h.h1 * s, h.h2 * s).unwrap();
        let a = RneModel::fit(&r, &cfg).unwrap().predict(u, i, h).unwrap().value;
        let b = RneModel::fit(&scaled, &cfg).unwrap().predict(u, i, hs).unwrap().value;
        match (a, b) {
            (Some(a), Some(b)) => prop_assert!((b - s * a).abs() <= 1e-9 * s.max(1.0) * (1.0 + a.abs())),
            (None, None) => {}
            other => prop_assert!(false, "NA mismatch {other:?}"),
        }
    }

    #[test]
    fn rne_prediction_is_a_convex_combination((r, u, i) in small_problem(), h in bandwidths(), drop in any::<bool>()) {
        prop_assume!(!r.is_empty());
        let cfg = RneConfig {
            one_sided: if drop { OneSided::Drop } else { OneSided::Include },
            ..RneConfig::default()
        };
        let model = RneModel::fit(&r, &cfg).unwrap();
        let set = model.neighbors(u, i).unwrap();
        if let Some(z) = model.predict(u, i, h).unwrap().value {
            let lo = set.members.iter().map(|m| m.rating).fold(f64::INFINITY, f64::min);
            let hi = set.members.iter().map(|m| m.rating).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-12 <= z && z <= hi + 1e-12);
        }
    }

    #[test]
    fn wide_bandwidths_give_the_plain_mean((r, u, i) in small_problem()) {
        prop_assume!(!r.is_empty());
        let model = RneModel::fit(&r, &RneConfig::default()).unwrap();
        let set = model.neighbors(u, i).unwrap();
        let h = Bandwidths::new(1e9, 1e9).unwrap();
        let z = model.predict(u, i, h).unwrap().value;
        if set.is_empty() {
            prop_assert_eq!(z, None);
        } else {
            let mean = set.members.iter().map(|m| m.rating).sum::<f64>() / set.len() as f64;
            prop_assert!((z.unwrap() - mean).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_path_matches_single_predictions((r, u, i) in small_problem(), hs in prop::collection::vec(0.1f64..5.0, 1..4)) {
        prop_assume!(!r.is_empty());
        let model = RneModel::fit(&r, &RneConfig::default()).unwrap();
        let grid = model.predict_grid(u, i, &hs, &hs).unwrap();
        for (a, &h1) in hs.iter().enumerate() {
            for (b, &h2) in hs.iter().enumerate() {
                let one = model.predict(u, i, Bandwidths::new(h1, h2).unwrap()).unwrap();
                let g = grid[a * hs.len() + b];
                match (one.value, g.value) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs())),
                    (x, y) => prop_assert_eq!(x, y),
                }
            }
        }
    }

    #[test]
    fn cf_prediction_is_inside_neighbor_ratings((r, u, i) in small_problem(), item_axis in any::<bool>()) {
        let axis = if item_axis { CfAxis::Item } else { CfAxis::User };
        let nbrs = cf_neighborhood(&r, axis, u, i, CfOptions::default()).unwrap();
        let z = cf_predict(&r, axis, u, i, CfOptions::default()).unwrap();
        prop_assert_eq!(z.is_some(), !nbrs.is_empty());
        if let Some(z) = z {
            let lo = nbrs.iter().map(|n| n.rating).fold(f64::INFINITY, f64::min);
            let hi = nbrs.iter().map(|n| n.rating).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-12 <= z && z <= hi + 1e-12);
            prop_assert!(nbrs.iter().all(|n| n.weight > 0.0));
        }
    }

    #[test]
    fn cf_item_axis_is_user_axis_on_transpose((r, u, i) in small_problem()) {
        let dense = Dense::from_sparse(&r).transpose();
        let want = dense.user_cf(i, u);
        let got = cf_neighborhood(&r, CfAxis::Item, u, i, CfOptions::default()).unwrap();
        prop_assert_eq!(got.len(), want.len());
    }

    #[test]
    fn blind_regression_exact_on_additive_matrices(
        rows in prop::collection::vec(-5.0f64..5.0, 6),
        cols in prop::collection::vec(-5.0f64..5.0, 6),
        seed in any::<u64>(),
        lambda in 0.0f64..3.0,
    ) {
        let mask = random_ratings(6, 6, 0.7, seed);
        let r = SparseRatings::from_triples(
            mask.triples().iter().map(|t| (t.user, t.item, rows[t.user] + cols[t.item])),
            6,
            6,
        )
        .unwrap();
        for u in 0..6 {
            for i in 0..6 {
                if let Some(z) = blind_regression_predict(&r, u, i, lambda, 2).unwrap() {
                    prop_assert!((z - rows[u] - cols[i]).abs() < 1e-9);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn soft_impute_objective_never_rises(seed in any::<u64>(), lambda in 0.05f64..4.0) {
        let r = random_ratings(12, 10, 0.5, seed);
        prop_assume!(!r.is_empty());
        let fit = accept_unconverged(soft_impute(&r, lambda, SoftImputeOptions::default())).unwrap();
        for w in fit.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
        }
    }
}
