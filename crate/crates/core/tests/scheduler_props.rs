use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shfl_core::radio::{self, LinkBudget};
use shfl_core::scheduler::*;

fn spec(edges: usize) -> InstanceSpec {
    InstanceSpec { edges, ..InstanceSpec::default() }
}

/// The selection subproblem's objective, written out directly.
fn px_objective(inst: &SchedulingInstance, state: &AdmmState, nu: f64, alpha: &[f64]) -> f64 {
    let mut v = 0.0;
    let mut worst: f64 = 0.0;
    for (k, e) in inst.edges.iter().enumerate() {
        let b = state.plan.edge_ul[k];
        let lat = state.device_level + radio::link_latency(inst.payload_bits, b, &e.uplink, inst.noise_density);
        let a = alpha[k];
        let aux = state.alpha_aux[k];
        v += -inst.rho * e.importance * a + state.multipliers.cloud_price * a * b;
        worst = worst.max(a * lat);
        let c1 = a * (1.0 - aux) + nu * state.lambda[k];
        let c2 = a - aux + nu * state.lambda_aux[k];
        v += (c1 * c1 + c2 * c2) / (2.0 * nu);
    }
    v + (1.0 - inst.rho) * worst
}

#[test]
fn selection_subproblem_beats_a_fine_grid() {
    const STEPS: usize = 100;
    for seed in 0..12 {
        let inst = random_instance(&spec(3), seed).unwrap();
        let nu = 1.0 / objective_scale(&inst).unwrap();
        let mut state = initial_state(&inst, nu, InitRule::Neutral).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..3 {
            state.alpha_aux[k] = r.gen_range(0.0..1.0);
            state.lambda[k] = r.gen_range(-1.0..1.0) / nu;
            state.lambda_aux[k] = r.gen_range(-1.0..1.0) / nu;
        }
        let px = solve_selection_subproblem(&inst, &state, nu).unwrap();
        let got = px_objective(&inst, &state, nu, &px.alpha);
        let mut best = f64::INFINITY;
        for i in 0..=STEPS {
            for j in 0..=STEPS {
                for l in 0..=STEPS {
                    let a = [i as f64 / STEPS as f64, j as f64 / STEPS as f64, l as f64 / STEPS as f64];
                    best = best.min(px_objective(&inst, &state, nu, &a));
                }
            }
        }
        assert!(got <= best + 1e-3 * best.abs().max(1.0), "seed {seed}: solver {got} grid {best}");
    }
}

#[test]
fn oracle_keeps_an_edge_whose_importance_rises() {
    for edges in 2..=4 {
        for seed in 0..40 {
            let inst = random_instance(&spec(edges), seed).unwrap();
            let base = brute_force_oracle(&inst).unwrap();
            for k in base.selected_ids() {
                let mut up = inst.clone();
                up.edges[k].importance *= 1.5;
                assert!(brute_force_oracle(&up).unwrap().selected[k], "K={edges} seed {seed} edge {k}");
            }
        }
    }
}

#[test]
fn oracle_keeps_an_edge_whose_uplink_gets_faster() {
    for edges in 2..=4 {
        for seed in 0..40 {
            let inst = random_instance(&spec(edges), seed).unwrap();
            let base = brute_force_oracle(&inst).unwrap();
            for k in base.selected_ids() {
                let mut up = inst.clone();
                let link = up.edges[k].uplink;
                up.edges[k].uplink = LinkBudget::new(link.gain * 4.0, link.tx_power).unwrap();
                assert!(brute_force_oracle(&up).unwrap().selected[k], "K={edges} seed {seed} edge {k}");
            }
        }
    }
}

#[test]
fn admm_schedules_are_feasible_and_consistent() {
    for edges in [1, 3, 6, 10] {
        for seed in 0..15 {
            let inst = random_instance(&spec(edges), seed).unwrap();
            let s = admm_solve(&inst, &SolverConfig::default()).unwrap();
            let weights: Vec<f64> = s.selected.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect();
            s.plan.check(&weights, inst.edge_tier_bandwidth, inst.cloud_tier_bandwidth).unwrap();
            let value = objective_value(&inst, &s.selected, &s.plan).unwrap();
            assert!((value - s.objective).abs() <= 1e-12 * value.abs().max(1e-12));
            assert!(s.objective <= 0.0, "never worse than selecting nothing");
            for (k, &sel) in s.selected.iter().enumerate() {
                if !sel {
                    assert_eq!(s.plan.edge_ul[k], 0.0);
                }
            }
        }
    }
}

#[test]
fn admm_is_deterministic() {
    for seed in 0..10 {
        let inst = random_instance(&spec(8), seed).unwrap();
        let cfg = SolverConfig::default();
        assert_eq!(admm_solve(&inst, &cfg).unwrap(), admm_solve(&inst, &cfg).unwrap());
    }
}

#[test]
fn oracle_is_a_lower_bound() {
    for seed in 0..30 {
        let inst = random_instance(&spec(5), seed).unwrap();
        let o = brute_force_oracle(&inst).unwrap();
        let a = admm_solve(&inst, &SolverConfig::default()).unwrap();
        assert!(o.objective <= a.objective + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn stationarity_root_falls_as_ratio_rises(
        gain_db in -140.0..-80.0f64,
        r1 in 1e-14..1e-6f64,
        factor in 1.0..100.0f64,
        payload in 1e3..1e8f64,
    ) {
        let link = LinkBudget::new(10f64.powf(gain_db / 10.0), 0.01).unwrap();
        let n0 = radio::dbm_to_watts(-174.0);
        let a = bandwidth_stationarity_root(r1, payload, &link, n0, 1e9).unwrap();
        let b = bandwidth_stationarity_root(r1 * factor, payload, &link, n0, 1e9).unwrap();
        prop_assert!(b.bandwidth <= a.bandwidth * (1.0 + 1e-12));
        if !a.clamped {
            let h = radio::marginal_latency_reduction(a.bandwidth, payload, &link, n0);
            prop_assert!((h - r1).abs() <= 1e-9 * r1);
        }
    }
}
