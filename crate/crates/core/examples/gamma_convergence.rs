//! Same instance, three penalties: smaller gamma buys a lower plateau with
//! proportionally more rounds.
//!
//! `cargo run --release --example gamma_convergence`

use netlasso::harness::{cmd_convergence, ExperimentSpec};

fn main() -> netlasso::Result<()> {
    let mut spec = ExperimentSpec::default();
    spec.data.n_total = 100;
    spec.data.d = 50;
    spec.data.s = Some(3);
    spec.network.m = 5;
    spec.solver.lambda = Some(0.1);
    spec.solver.radius = Some(f64::INFINITY);
    spec.sweep.gammas = vec![1e-2, 1e-3, 1e-4];
    spec.sweep.budget_gamma = Some(20.0);
    spec.sweep.points_per_trace = Some(200);
    spec.seed = 7;
    spec.out = std::env::temp_dir().join("netlasso_examples/gamma_convergence");

    let res = cmd_convergence(&spec)?;
    println!("lambda {} (local reference uses {:.4})", res.lambda, res.lambda_local);
    for run in &res.runs {
        let Some(pa) = run.analysis else { continue };
        println!(
            "gamma {:>7.0e}  beta {:.3e}  plateau {:.6}  rounds to plateau {:>7}  R^2(log excess) {:.4}",
            run.gamma,
            run.beta,
            pa.plateau,
            pa.iters_to_plateau,
            pa.r_squared_log_excess.unwrap_or(f64::NAN)
        );
    }
    println!("centralized error {:?}", res.centralized);
    println!("local-only error  {:?}", res.local.avg_est_err);
    Ok(())
}
