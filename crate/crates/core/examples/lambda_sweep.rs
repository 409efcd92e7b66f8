//! Monte-Carlo error curves over a lambda grid: distributed vs centralized.
//!
//! `cargo run --release --example lambda_sweep`

use netlasso::graph::Topology;
use netlasso::harness::{cmd_sweep, ExperimentSpec, Init, SweepAxis};

fn main() -> netlasso::Result<()> {
    let mut spec = ExperimentSpec::default();
    spec.data.n_total = 120;
    spec.data.d = 150;
    spec.data.s = Some(4);
    spec.network.m = 6;
    spec.network.topology = Topology::ErdosRenyi { p: 0.5 };
    spec.solver.gamma = Some(1e-3);
    spec.solver.init = Init::Centralized;
    spec.solver.rel_tol_per_beta = 1e-4;
    spec.solver.max_iters = 200_000;
    spec.sweep.axis = SweepAxis::Lambda;
    spec.sweep.grid = vec![0.03, 0.06, 0.12, 0.24];
    spec.sweep.band = 0.1;
    spec.reps = 4;
    spec.seed = 3;
    spec.out = std::env::temp_dir().join("netlasso_examples/lambda_sweep");

    let res = cmd_sweep(&spec)?;
    println!("{:>8} {:>22} {:>22}", "lambda", "distributed", "centralized");
    for r in &res.rows {
        println!(
            "{:>8.3} {:>12.5} ± {:<7.5} {:>12.5} ± {:<7.5}",
            r.axis_value,
            r.dist_err_mean.unwrap_or(f64::NAN),
            r.dist_err_std.unwrap_or(f64::NAN),
            r.central_err_mean,
            r.central_err_std
        );
    }
    println!("{} (band met: {})", res.note, res.band_met);
    println!("wrote {}", spec.out.join("sweep.csv").display());
    Ok(())
}
