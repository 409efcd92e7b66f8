//! Real-data path: a CSV with the response in column 0, a held-out split,
//! and test MSE in place of estimation error.
//!
//! `cargo run --release --example csv_workflow`

use netlasso::datagen::{synthetic_problem, DEFAULT_PHI};
use netlasso::harness::{cmd_solve, ExperimentSpec};

fn main() -> netlasso::Result<()> {
    let dir = std::env::temp_dir().join("netlasso_examples/csv_workflow");
    std::fs::create_dir_all(&dir)?;
    // Stand-in for an external dataset.
    let csv = dir.join("input.csv");
    let (_, ds) = synthetic_problem(300, 30, 4, 0.5, DEFAULT_PHI, 21)?;
    ds.write_csv(&csv)?;

    let mut spec = ExperimentSpec::default();
    spec.data.csv = Some(csv);
    spec.data.n_test = 60;
    spec.network.m = 6;
    spec.solver.lambda = Some(0.05);
    spec.solver.gamma = Some(1e-3);
    spec.solver.max_iters = 20_000;
    spec.solver.stride = 2_000;
    spec.out = dir.join("run");

    let res = cmd_solve(&spec)?;
    for row in &res.trace.metrics {
        println!("round {:>6}  mse_test {:.5}  consensus_err {:.3e}", row.iter, row.mse_test.unwrap_or(f64::NAN), row.consensus_err);
    }
    println!("radius {} ({})", res.trace.config.radius, res.trace.config.provenance.get("radius").map_or("-", |s| s.as_str()));
    println!("wrote {}", spec.out.join("trace.csv").display());
    Ok(())
}
