//! Mixing matrices for every topology and weight rule, with their spectra.
//!
//! `cargo run --example gossip_spectra`

use netlasso::graph::{build_topology, Topology, WeightRule};

fn main() -> netlasso::Result<()> {
    let m = 16;
    let topologies = [
        Topology::Complete,
        Topology::Star,
        Topology::Path,
        Topology::Grid2d,
        Topology::ErdosRenyi { p: 0.3 },
    ];
    let rules = [WeightRule::Metropolis, WeightRule::LazyMetropolis];
    println!("{:<12} {:<16} {:>10} {:>12}", "topology", "weights", "rho", "lambda_min");
    for topo in topologies {
        let g = build_topology(topo, m, 42)?;
        for rule in rules {
            let w = rule.apply(&g)?;
            w.check_compliance(&g)?;
            println!("{:<12} {:<16} {:>10.5} {:>12.5}", topo.name(), format!("{rule:?}"), w.rho(), w.lambda_min());
        }
    }

    // Plain averaging mixes in one round.
    let w = WeightRule::Uniform.apply(&build_topology(Topology::Complete, m, 0)?)?;
    println!("\nuniform averaging on the complete graph: rho = {}", w.rho());
    Ok(())
}
