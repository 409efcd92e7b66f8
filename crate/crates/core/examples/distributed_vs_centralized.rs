//! One distributed run next to the centralized LASSO on pooled data.
//!
//! `cargo run --example distributed_vs_centralized`

use netlasso::datagen::{partition, synthetic_problem, DEFAULT_PHI};
use netlasso::graph::{build_topology, lazy_metropolis_weights, Topology};
use netlasso::solver::{centralized_ista, run, stepsize_bound, IstaConfig, SolverConfig};

fn main() -> netlasso::Result<()> {
    let (n_total, d, s, m) = (200, 100, 5, 10);
    let (truth, data) = synthetic_problem(n_total, d, s, 0.5, DEFAULT_PHI, 11)?;
    let shards = partition(&data, m)?;
    let graph = build_topology(Topology::ErdosRenyi { p: 0.4 }, m, 11)?;
    let w = lazy_metropolis_weights(&graph)?;

    let lambda = 0.08;
    let gamma = 1e-3;
    let beta = stepsize_bound(gamma, shards.l_max()?, w.lambda_min());
    let mut cfg = SolverConfig::new(lambda, gamma, beta, f64::INFINITY, 50_000);
    cfg.rel_tol = 1e-10;
    cfg.metric_stride = 5_000;
    let trace = run(&shards, &w, &cfg, Some(&truth), None)?;
    for row in &trace.metrics {
        println!(
            "round {:>6}  avg_est_err {:.5}  consensus_err {:.3e}  G {:.6}",
            row.iter,
            row.avg_est_err.unwrap_or(f64::NAN),
            row.consensus_err,
            row.objective_g
        );
    }

    let central = centralized_ista(&data.x, &data.y, &IstaConfig::for_design(&data.x, lambda)?)?;
    let central_err = (&central.theta - truth.vector()).norm_squared();
    println!("\nstop: {:?} after {} rounds", trace.stop, trace.iterations());
    println!("distributed (1/m) sum ||theta_i - theta*||^2  {:.5}", trace.last().avg_est_err.unwrap_or(f64::NAN));
    println!("centralized ||theta - theta*||^2             {central_err:.5} ({} ISTA steps)", central.iterations);
    Ok(())
}
