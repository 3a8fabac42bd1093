use proptest::prelude::*;
use shfl_core::aggregation::{
    cloud_aggregate, edge_aggregate, elastic_update, layer_divergence, weight_distance, EdgeModelReport, LayerSet,
};
use shfl_core::model::{Layer, ParamVector};

const DIM: usize = 6;

fn vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, DIM)
}

fn pv(v: Vec<f64>) -> ParamVector {
    ParamVector::single(v).unwrap()
}

fn two_layer(v: &[f64]) -> ParamVector {
    ParamVector::new(vec![
        Layer { name: "a".into(), values: v[..2].to_vec() },
        Layer { name: "b".into(), values: v[2..].to_vec() },
    ])
    .unwrap()
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * scale.max(1.0)
}

fn locals() -> impl Strategy<Value = Vec<(Vec<f64>, u64)>> {
    prop::collection::vec((vector(), 1u64..10_000), 1..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn edge_mean_stays_in_coordinate_hull(ls in locals()) {
        let models: Vec<(ParamVector, u64)> = ls.iter().map(|(v, n)| (pv(v.clone()), *n)).collect();
        let out = edge_aggregate(&models).unwrap().to_flat();
        for j in 0..DIM {
            let lo = ls.iter().map(|(v, _)| v[j]).fold(f64::INFINITY, f64::min);
            let hi = ls.iter().map(|(v, _)| v[j]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(out[j] >= lo - 1e-9 * lo.abs().max(1.0) && out[j] <= hi + 1e-9 * hi.abs().max(1.0));
        }
    }

    #[test]
    fn edge_mean_of_identical_models_is_that_model(v in vector(), counts in prop::collection::vec(1u64..1000, 1..6)) {
        let models: Vec<(ParamVector, u64)> = counts.iter().map(|&n| (pv(v.clone()), n)).collect();
        let out = edge_aggregate(&models).unwrap().to_flat();
        for (o, x) in out.iter().zip(&v) {
            prop_assert!(close(*o, *x, x.abs()));
        }
    }

    #[test]
    fn edge_mean_matches_weighted_formula_and_ignores_order(ls in locals(), scale in 1u64..50) {
        let models: Vec<(ParamVector, u64)> = ls.iter().map(|(v, n)| (pv(v.clone()), *n)).collect();
        let out = edge_aggregate(&models).unwrap().to_flat();
        let total: u64 = ls.iter().map(|(_, n)| n).sum();
        let mut reversed = models.clone();
        reversed.reverse();
        let rev = edge_aggregate(&reversed).unwrap().to_flat();
        let scaled: Vec<(ParamVector, u64)> = models.iter().map(|(m, n)| (m.clone(), n * scale)).collect();
        let sc = edge_aggregate(&scaled).unwrap().to_flat();
        for j in 0..DIM {
            let want: f64 = ls.iter().map(|(v, n)| *n as f64 / total as f64 * v[j]).sum();
            prop_assert!(close(out[j], want, 100.0));
            prop_assert!(close(rev[j], want, 100.0));
            prop_assert!(close(sc[j], want, 100.0));
        }
    }

    #[test]
    fn cloud_with_no_selection_is_identity(w in vector(), total in 1u64..1_000_000) {
        let prev = pv(w);
        prop_assert_eq!(cloud_aggregate(&prev, &[], total).unwrap(), prev);
    }

    #[test]
    fn cloud_fixed_point(w in vector(), counts in prop::collection::vec(1u64..1000, 1..6), extra in 0u64..5000) {
        let prev = pv(w.clone());
        let reports: Vec<EdgeModelReport> = counts
            .iter()
            .enumerate()
            .map(|(k, &n)| EdgeModelReport { edge_id: k, model: prev.clone(), data_count: n, gnv: 0.0 })
            .collect();
        let total = counts.iter().sum::<u64>() + extra;
        let out = cloud_aggregate(&prev, &reports, total).unwrap().to_flat();
        prop_assert_eq!(out, w);
    }

    #[test]
    fn cloud_with_every_edge_is_weighted_mean(w in vector(), ls in locals()) {
        let prev = pv(w);
        let reports: Vec<EdgeModelReport> = ls
            .iter()
            .enumerate()
            .map(|(k, (v, n))| EdgeModelReport { edge_id: k, model: pv(v.clone()), data_count: *n, gnv: 0.0 })
            .collect();
        let total: u64 = ls.iter().map(|(_, n)| n).sum();
        let out = cloud_aggregate(&prev, &reports, total).unwrap().to_flat();
        let models: Vec<(ParamVector, u64)> = ls.iter().map(|(v, n)| (pv(v.clone()), *n)).collect();
        let mean = edge_aggregate(&models).unwrap().to_flat();
        for j in 0..DIM {
            prop_assert!(close(out[j], mean[j], 200.0));
        }
    }

    #[test]
    fn elastic_endpoints_are_exact(k in vector(), c in vector()) {
        let (wk, wc) = (pv(k), pv(c));
        prop_assert_eq!(elastic_update(&wk, &wc, 0.0).unwrap(), wk.clone());
        prop_assert_eq!(elastic_update(&wk, &wc, 1.0).unwrap(), wc.clone());
    }

    #[test]
    fn elastic_clamps_out_of_range(k in vector(), c in vector(), below in -1e6..0.0f64, above in 1.0..1e6f64) {
        let (wk, wc) = (pv(k), pv(c));
        prop_assert_eq!(elastic_update(&wk, &wc, below).unwrap(), wk.clone());
        prop_assert_eq!(elastic_update(&wk, &wc, above).unwrap(), wc.clone());
    }

    #[test]
    fn elastic_moves_eps_of_the_way(k in vector(), c in vector(), eps in 0.0..=1.0f64) {
        let (wk, wc) = (pv(k.clone()), pv(c.clone()));
        let out = elastic_update(&wk, &wc, eps).unwrap().to_flat();
        for j in 0..DIM {
            prop_assert!(close(out[j], k[j] + eps * (c[j] - k[j]), 100.0));
        }
    }

    #[test]
    fn divergence_is_nonnegative_and_zero_at_reference(k in vector(), c in vector()) {
        prop_assume!(c[..2].iter().any(|x| *x != 0.0) && c[2..].iter().any(|x| *x != 0.0));
        let (wk, wc) = (two_layer(&k), two_layer(&c));
        let layers = LayerSet::all_of(&wc);
        prop_assert!(layer_divergence(&wk, &wc, &layers).unwrap() >= 0.0);
        prop_assert_eq!(layer_divergence(&wc, &wc, &layers).unwrap(), 0.0);
        prop_assert_eq!(weight_distance(&wc, &wc).unwrap(), 0.0);
    }

    #[test]
    fn single_layer_divergence_is_weight_distance(k in vector(), c in vector()) {
        prop_assume!(c.iter().any(|x| *x != 0.0));
        let (wk, wc) = (pv(k), pv(c));
        let layers = LayerSet::all_of(&wc);
        prop_assert_eq!(layer_divergence(&wk, &wc, &layers).unwrap(), weight_distance(&wk, &wc).unwrap());
    }
}
