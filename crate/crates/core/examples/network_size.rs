//! Rounds needed to come within the band of the centralized error as the
//! same data is spread over more agents.
//!
//! `cargo run --release --example network_size`

use netlasso::harness::{cmd_sweep, ExperimentSpec, SweepAxis};

fn main() -> netlasso::Result<()> {
    let mut spec = ExperimentSpec::default();
    spec.data.n_total = 240;
    spec.data.d = 60;
    spec.data.s = Some(3);
    spec.solver.gamma = Some(1e-3);
    spec.solver.max_iters = 100_000;
    spec.sweep.axis = SweepAxis::M;
    spec.sweep.grid = vec![2.0, 4.0, 8.0, 12.0];
    spec.sweep.band = 0.05;
    spec.reps = 3;
    spec.seed = 9;
    spec.out = std::env::temp_dir().join("netlasso_examples/network_size");

    let res = cmd_sweep(&spec)?;
    for r in &res.rows {
        println!(
            "m = {:>3}  rounds {:>9.1} ± {:<8.1}  final error {:.5} (centralized {:.5})",
            r.axis_value,
            r.rounds_mean.unwrap_or(f64::NAN),
            r.rounds_std.unwrap_or(f64::NAN),
            r.dist_err_mean.unwrap_or(f64::NAN),
            r.central_err_mean
        );
    }
    Ok(())
}
