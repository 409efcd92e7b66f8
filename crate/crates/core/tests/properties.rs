//! Property-based invariants of the operators, the iteration and the file formats.

use nalgebra::DVector;
use netlasso::datagen::{load_csv, partition, synthetic_problem, DEFAULT_PHI};
use netlasso::graph::{build_topology, Graph, Topology, WeightRule};
use netlasso::harness::{read_sweep_csv, write_sweep_csv, ExperimentSpec, SweepRow};
use netlasso::proxops::{constrained_prox, l1_norm, project_l1_ball, soft_threshold};
use netlasso::solver::{
    dgd_step, evaluate_objective, read_metrics_csv, stepsize_bound, write_metrics_csv, IterationMetrics,
    SolverConfig, StackedState,
};
use proptest::prelude::*;

fn vec_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..max_len)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn prox_objective(x: &[f64], psi: &[f64], t: f64) -> f64 {
    0.5 * dist(x, psi).powi(2) + t * l1_norm(x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn soft_threshold_is_nonexpansive(pair in (1usize..30).prop_flat_map(|d| (
        prop::collection::vec(-10.0f64..10.0, d), prop::collection::vec(-10.0f64..10.0, d))), t in 0.0f64..3.0) {
        let (u, v) = pair;
        let su = soft_threshold(&u, t).unwrap();
        let sv = soft_threshold(&v, t).unwrap();
        prop_assert!(dist(&su, &sv) <= dist(&u, &v) + 1e-12);
    }

    #[test]
    fn projection_is_feasible_idempotent_and_nonexpansive(pair in (1usize..30).prop_flat_map(|d| (
        prop::collection::vec(-10.0f64..10.0, d), prop::collection::vec(-10.0f64..10.0, d))), r in 1e-3f64..20.0) {
        let (u, v) = pair;
        let pu = project_l1_ball(&u, r).unwrap();
        let pv = project_l1_ball(&v, r).unwrap();
        prop_assert!(l1_norm(&pu) <= r);
        prop_assert_eq!(&project_l1_ball(&pu, r).unwrap(), &pu);
        prop_assert!(dist(&pu, &pv) <= dist(&u, &v) + 1e-12);
    }

    #[test]
    fn projection_is_the_closest_feasible_point(v in vec_strategy(12), r in 0.1f64..10.0, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let p = project_l1_ball(&v, r).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let mut q: Vec<f64> = p.iter().map(|x| x + rng.random_range(-0.5..0.5)).collect();
            let n = l1_norm(&q);
            if n > r {
                q.iter_mut().for_each(|x| *x *= r / n);
            }
            prop_assert!(dist(&p, &v) <= dist(&q, &v) + 1e-9);
        }
    }

    #[test]
    fn constrained_prox_is_feasible_and_beats_feasible_perturbations(
        v in vec_strategy(10), t in 0.0f64..2.0, r in 0.1f64..10.0, seed in any::<u64>()
    ) {
        use rand::{Rng, SeedableRng};
        let x = constrained_prox(&v, t, r).unwrap();
        prop_assert!(l1_norm(&x) <= r);
        let best = prox_objective(&x, &v, t);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let mut q: Vec<f64> = x.iter().map(|a| a + rng.random_range(-0.2..0.2)).collect();
            let n = l1_norm(&q);
            if n > r {
                q.iter_mut().for_each(|a| *a *= r / n);
            }
            prop_assert!(best <= prox_objective(&q, &v, t) + 1e-9);
        }
    }

    #[test]
    fn state_splits_into_average_and_orthogonal_part(blocks in (1usize..6, 1usize..8).prop_flat_map(|(m, d)|
        prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), m))) {
        let state = StackedState::new(blocks.iter().map(|b| DVector::from_vec(b.clone())).collect()).unwrap();
        let avg = state.average();
        let perp = state.orthogonal();
        let mut sum = DVector::zeros(state.dim());
        for (i, p) in perp.iter().enumerate() {
            sum += p;
            prop_assert!((&avg + p - &state.blocks[i]).amax() <= 1e-12);
        }
        prop_assert!(sum.amax() <= 1e-10);
        let perp_sq: f64 = perp.iter().map(|p| p.norm_squared()).sum::<f64>() / state.agents() as f64;
        prop_assert!((perp_sq - state.consensus_err()).abs() <= 1e-10 * (1.0 + perp_sq));
    }

    #[test]
    fn gossip_matrices_are_symmetric_stochastic(m in 2usize..12, p in 0.2f64..1.0, seed in any::<u64>(), lazy in any::<bool>()) {
        let g = match build_topology(Topology::ErdosRenyi { p }, m, seed) {
            Ok(g) => g,
            Err(_) => return Ok(()),
        };
        let rule = if lazy { WeightRule::LazyMetropolis } else { WeightRule::Metropolis };
        let w = rule.apply(&g).unwrap();
        let dense = w.dense();
        for i in 0..m {
            let row: f64 = (0..m).map(|j| dense[(i, j)]).sum();
            prop_assert!((row - 1.0).abs() <= 1e-12);
            for j in 0..m {
                prop_assert_eq!(dense[(i, j)], dense[(j, i)]);
                prop_assert!(dense[(i, j)] >= 0.0);
                if i != j && !g.has_edge(i, j) {
                    prop_assert_eq!(dense[(i, j)], 0.0);
                }
            }
        }
        prop_assert!(w.rho() < 1.0);
        if lazy {
            prop_assert!(w.lambda_min() >= -1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_round_decreases_the_objective(
        seed in 0u64..10_000,
        m in 1usize..6,
        lambda in 0.0f64..0.5,
        log_gamma in -3.0f64..0.0,
        radius in prop_oneof![Just(f64::INFINITY), 0.5f64..5.0],
    ) {
        let (_, ds) = synthetic_problem(12 * m, 8, 2, 0.5, DEFAULT_PHI, seed).unwrap();
        let shards = partition(&ds, m).unwrap();
        let g = build_topology(Topology::Path, m, seed).unwrap();
        let w = WeightRule::LazyMetropolis.apply(&g).unwrap();
        let gamma = 10f64.powf(log_gamma);
        let beta = stepsize_bound(gamma, shards.l_max().unwrap(), w.lambda_min());
        let cfg = SolverConfig::new(lambda, gamma, beta, radius, 1);
        let mut state = StackedState::zeros(m, 8);
        let mut prev = evaluate_objective(&state, &shards, &w, &cfg).unwrap().1;
        for _ in 0..50 {
            state = dgd_step(&state, &w, &shards, &cfg).unwrap();
            prop_assert!(state.max_l1() <= radius);
            let g = evaluate_objective(&state, &shards, &w, &cfg).unwrap().1;
            prop_assert!(g <= prev + 1e-12 * prev.abs().max(1.0), "G rose from {} to {}", prev, g);
            prev = g;
        }
    }

    #[test]
    fn dataset_csv_round_trips(seed in any::<u64>(), n in 2usize..30, d in 2usize..6) {
        let (_, ds) = synthetic_problem(n, d, 1, 0.5, DEFAULT_PHI, seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        ds.write_csv(&path).unwrap();
        let back = load_csv(&path).unwrap();
        prop_assert_eq!(&back.x, &ds.x);
        prop_assert_eq!(&back.y, &ds.y);
    }

    #[test]
    fn trace_csv_round_trips(rows in prop::collection::vec((
        prop::option::of(0.0f64..1e3), 0.0f64..1e3, -1e3f64..1e3, 0.0f64..1e3, prop::option::of(0.0f64..1e3)), 1..20)) {
        let metrics: Vec<IterationMetrics> = rows.iter().enumerate().map(|(i, r)| IterationMetrics {
            iter: i * 7,
            avg_est_err: r.0,
            consensus_err: r.1,
            objective_g: r.2,
            objective_gap: r.3,
            mse_test: r.4,
            elapsed_ms: None,
        }).collect();
        let mut buf = Vec::new();
        write_metrics_csv(&metrics, &mut buf).unwrap();
        prop_assert_eq!(read_metrics_csv(buf.as_slice()).unwrap(), metrics);
    }

    #[test]
    fn sweep_csv_round_trips(rows in prop::collection::vec((1e-4f64..1.0, 1usize..1000, prop::option::of(0.0f64..10.0), 0.0f64..10.0), 1..10)) {
        let rows: Vec<SweepRow> = rows.iter().map(|r| SweepRow {
            axis_value: r.0,
            n_total: r.1,
            reps: 3,
            dist_err_mean: r.2,
            dist_err_std: r.2.map(|v| v / 2.0),
            central_err_mean: r.3,
            central_err_std: 0.0,
            gamma: Some(r.0 / 10.0),
            gamma_crit: None,
            inv_gamma_crit: None,
            rounds_mean: r.2.map(|v| v * 100.0),
            rounds_std: None,
        }).collect();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        prop_assert_eq!(read_sweep_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn edge_lists_round_trip(m in 2usize..15, p in 0.3f64..1.0, seed in any::<u64>()) {
        let Ok(g) = build_topology(Topology::ErdosRenyi { p }, m, seed) else { return Ok(()) };
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let back = Graph::read_edge_list(m, buf.as_slice()).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn spec_json_round_trips(n in 1usize..50, m in 1usize..10, seed in any::<u64>(), lambda in prop::option::of(1e-4f64..1.0)) {
        let mut spec = ExperimentSpec::default();
        spec.data.n_total = n * m;
        spec.network.m = m;
        spec.seed = seed;
        spec.solver.lambda = lambda;
        let text = spec.to_json().unwrap();
        let back: ExperimentSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, spec);
    }
}
