//! Every theory rule evaluated on one configuration; entries whose
//! preconditions fail carry the reason instead of a number.
//!
//! `cargo run --release --example theory_diagnostics`

use netlasso::harness::{cmd_diagnose, ExperimentSpec};

fn main() -> netlasso::Result<()> {
    let mut spec = ExperimentSpec::default();
    spec.data.n_total = 2000;
    spec.data.d = 20;
    spec.data.s = Some(2);
    spec.network.m = 5;
    spec.seed = 1;
    spec.out = std::env::temp_dir().join("netlasso_examples/theory_diagnostics");

    let report = cmd_diagnose(&spec)?;
    for (name, entry) in &report.0 {
        match &entry.error {
            Some(e) => println!("{name:<22} -- {e}"),
            None => println!("{name:<22} {}", entry.output),
        }
    }
    println!("\nwrote {}", spec.out.join("diagnostics.json").display());
    Ok(())
}
