//! Library outputs checked against slow, independently written references.

use nalgebra::{DMatrix, DVector};
use netlasso::datagen::{partition, synthetic_problem, AgentShards, DEFAULT_PHI};
use netlasso::graph::{build_topology, GossipMatrix, Topology, WeightRule};
use netlasso::proxops::{constrained_prox, project_l1_ball};
use netlasso::solver::{
    centralized_ista, dgd_step, evaluate_objective, local_gradient, stepsize_bound, IstaConfig, SolverConfig,
    StackedState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_state(r: &mut ChaCha8Rng, m: usize, d: usize, scale: f64) -> StackedState {
    let blocks = (0..m).map(|_| DVector::from_fn(d, |_, _| scale * r.sample::<f64, _>(StandardNormal))).collect();
    StackedState::new(blocks).unwrap()
}

fn instance(seed: u64, n_total: usize, d: usize, m: usize) -> (AgentShards, GossipMatrix) {
    let (_, ds) = synthetic_problem(n_total, d, 2, 0.5, DEFAULT_PHI, seed).unwrap();
    let shards = partition(&ds, m).unwrap();
    let g = build_topology(Topology::ErdosRenyi { p: 0.5 }, m, seed).unwrap();
    (shards, WeightRule::LazyMetropolis.apply(&g).unwrap())
}

/// `tau` with `sum_j max(|v_j| - tau, 0) = r`, by bisection on `[0, max|v|]`.
fn bisection_threshold(v: &[f64], r: f64) -> f64 {
    let mass = |tau: f64| v.iter().map(|x| (x.abs() - tau).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, v.iter().fold(0.0f64, |a, x| a.max(x.abs())));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn shrink_by(v: &[f64], tau: f64) -> Vec<f64> {
    v.iter().map(|x| x.signum() * (x.abs() - tau).max(0.0)).collect()
}

#[test]
fn projection_matches_bisection() {
    let mut r = rng(1);
    for _ in 0..500 {
        let d = r.random_range(1..40);
        let v: Vec<f64> = (0..d).map(|_| 3.0 * r.sample::<f64, _>(StandardNormal)).collect();
        let radius = r.random_range(0.01..5.0);
        let got = project_l1_ball(&v, radius).unwrap();
        let l1: f64 = v.iter().map(|x| x.abs()).sum();
        let want = if l1 <= radius { v.clone() } else { shrink_by(&v, bisection_threshold(&v, radius)) };
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn constrained_prox_uses_the_larger_threshold() {
    let mut r = rng(2);
    for _ in 0..500 {
        let d = r.random_range(1..20);
        let v: Vec<f64> = (0..d).map(|_| 2.0 * r.sample::<f64, _>(StandardNormal)).collect();
        let t = r.random_range(0.0..1.0);
        let radius = r.random_range(0.05..4.0);
        let soft = shrink_by(&v, t);
        let want = if soft.iter().map(|x| x.abs()).sum::<f64>() <= radius {
            soft
        } else {
            shrink_by(&v, bisection_threshold(&v, radius).max(t))
        };
        let got = constrained_prox(&v, t, radius).unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}

#[test]
fn local_gradient_matches_central_differences() {
    let (shards, _) = instance(3, 40, 8, 4);
    let f = |x: &DMatrix<f64>, y: &DVector<f64>, th: &DVector<f64>| (y - x * th).norm_squared() / (2.0 * x.nrows() as f64);
    let mut r = rng(3);
    for shard in &shards.shards {
        let theta = DVector::from_fn(8, |_, _| r.sample::<f64, _>(StandardNormal));
        let g = local_gradient(shard, &theta).unwrap();
        let h = 1e-5;
        for j in 0..8 {
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[j] += h;
            dn[j] -= h;
            let fd = (f(&shard.x, &shard.y, &up) - f(&shard.x, &shard.y, &dn)) / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-6 * (1.0 + g[j].abs()), "coordinate {j}: {fd} vs {}", g[j]);
        }
    }
}

/// `G` written as plain loops over agents, samples, coordinates and pairs.
fn naive_objective(state: &StackedState, shards: &AgentShards, w: &DMatrix<f64>, lambda: f64, gamma: f64) -> f64 {
    let m = shards.m;
    let total = shards.total_samples() as f64;
    let d = shards.dim();
    let mut fit = 0.0;
    for i in 0..m {
        let sh = &shards.shards[i];
        for k in 0..sh.samples() {
            let mut pred = 0.0;
            for j in 0..d {
                pred += sh.x[(k, j)] * state.blocks[i][j];
            }
            fit += (sh.y[k] - pred).powi(2);
        }
    }
    let mut quad = 0.0;
    for i in 0..m {
        for l in 0..m {
            let v = if i == l { 1.0 } else { 0.0 } - w[(i, l)];
            for j in 0..d {
                quad += v * state.blocks[i][j] * state.blocks[l][j];
            }
        }
    }
    let mut l1 = 0.0;
    for b in &state.blocks {
        for j in 0..d {
            l1 += b[j].abs();
        }
    }
    fit / (2.0 * total) + quad / (2.0 * m as f64 * gamma) + lambda * l1 / m as f64
}

#[test]
fn objective_matches_double_loop() {
    let mut r = rng(4);
    for seed in 0..20 {
        let (shards, w) = instance(seed, 60, 7, 6);
        let state = random_state(&mut r, 6, 7, 1.0);
        let lambda = r.random_range(0.0..0.5);
        let gamma = 10f64.powf(r.random_range(-4.0..0.0));
        let cfg = SolverConfig::new(lambda, gamma, 1e-3, f64::INFINITY, 1);
        let (_, g) = evaluate_objective(&state, &shards, &w, &cfg).unwrap();
        let want = naive_objective(&state, &shards, w.dense(), lambda, gamma);
        assert!((g - want).abs() <= 1e-12 * want.abs().max(1.0), "{g} vs {want}");
    }
}

/// `((I - W) ⊗ I_d) theta` by explicit loops.
fn v_times(state: &StackedState, w: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let m = state.agents();
    (0..m)
        .map(|i| {
            let mut out = state.blocks[i].clone();
            for l in 0..m {
                out -= &state.blocks[l] * w[(i, l)];
            }
            out
        })
        .collect()
}

#[test]
fn consensus_operator_vanishes_exactly_on_consensual_states() {
    let mut r = rng(5);
    for seed in 0..10 {
        let (_, w) = instance(seed, 60, 5, 6);
        let theta = DVector::from_fn(5, |_, _| r.sample::<f64, _>(StandardNormal));
        let consensual = StackedState::consensual(6, &theta);
        let norm: f64 = v_times(&consensual, w.dense()).iter().map(|b| b.norm_squared()).sum();
        assert!(norm.sqrt() <= 1e-12);

        let mut split = consensual.clone();
        split.blocks[seed as usize % 6][0] += 0.1;
        let norm: f64 = v_times(&split, w.dense()).iter().map(|b| b.norm_squared()).sum();
        assert!(norm.sqrt() > 1e-3, "connected graph must penalize disagreement");
    }
}

#[test]
fn one_round_matches_written_out_update() {
    let mut r = rng(6);
    for seed in 0..20 {
        let (shards, w) = instance(seed, 48, 6, 4);
        let state = random_state(&mut r, 4, 6, 0.5);
        let lambda = r.random_range(0.0..0.3);
        let gamma = 10f64.powf(r.random_range(-3.0..0.0));
        let radius = if seed % 2 == 0 { f64::INFINITY } else { r.random_range(0.5..3.0) };
        let beta = stepsize_bound(gamma, shards.l_max().unwrap(), w.lambda_min());
        let cfg = SolverConfig::new(lambda, gamma, beta, radius, 1);
        let next = dgd_step(&state, &w, &shards, &cfg).unwrap();
        for i in 0..4 {
            let sh = &shards.shards[i];
            let grad = sh.x.transpose() * (&sh.x * &state.blocks[i] - &sh.y) / sh.samples() as f64;
            let mut mix = DVector::zeros(6);
            for l in 0..4 {
                mix += &state.blocks[l] * w.dense()[(i, l)];
            }
            let psi = &state.blocks[i] - (&state.blocks[i] - mix) * (beta / gamma) - grad * beta;
            let soft = shrink_by(psi.as_slice(), beta * lambda);
            let want = if soft.iter().map(|x| x.abs()).sum::<f64>() <= radius {
                soft
            } else {
                shrink_by(psi.as_slice(), bisection_threshold(psi.as_slice(), radius))
            };
            for (a, b) in next.blocks[i].iter().zip(&want) {
                assert!((a - b).abs() <= 1e-9, "agent {i}: {a} vs {b}");
            }
        }
    }
}

/// Cyclic coordinate descent on `(1/2N)||y - X theta||^2 + lambda ||theta||_1`.
fn coordinate_descent(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let (n, d) = x.shape();
    let mut theta: DVector<f64> = DVector::zeros(d);
    let mut resid = y.clone();
    let col_sq: Vec<f64> = (0..d).map(|j| x.column(j).norm_squared() / n as f64).collect();
    for _ in 0..20_000 {
        let mut moved = 0.0f64;
        for j in 0..d {
            let rho: f64 = x.column(j).dot(&resid) / n as f64 + col_sq[j] * theta[j];
            let new = rho.signum() * (rho.abs() - lambda).max(0.0) / col_sq[j];
            let delta = new - theta[j];
            if delta != 0.0 {
                resid -= x.column(j) * delta;
                theta[j] = new;
                moved = moved.max(delta.abs());
            }
        }
        if moved < 1e-14 {
            break;
        }
    }
    theta
}

#[test]
fn ista_agrees_with_coordinate_descent() {
    for seed in 0..10 {
        let (_, ds) = synthetic_problem(80, 15, 3, 0.5, DEFAULT_PHI, seed).unwrap();
        let lambda = 0.05 + 0.02 * seed as f64;
        let mut cfg = IstaConfig::for_design(&ds.x, lambda).unwrap();
        cfg.tol = 1e-14;
        cfg.max_iters = 1_000_000;
        let got = centralized_ista(&ds.x, &ds.y, &cfg).unwrap();
        let want = coordinate_descent(&ds.x, &ds.y, lambda);
        assert!((&got.theta - &want).amax() <= 1e-8, "seed {seed}");
    }
}
