use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use netlasso::graph::{Topology, WeightRule};
use netlasso::harness::{self, ExperimentSpec, SweepAxis};
use netlasso::{Error, Result};

#[derive(Parser)]
#[command(name = "netlasso", version, about = "Penalized-consensus LASSO over simulated agent networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write data.csv and truth.json
    Generate(Common),
    /// Single distributed run: trace.csv and manifest.json
    Solve(Common),
    /// Monte-Carlo sweep over lambda, gamma, d or m: sweep.csv
    Sweep(Common),
    /// Same instance across several gammas: trace_<gamma>.csv and references.csv
    Convergence(Common),
    /// Theory report: diagnostics.json
    Diagnose(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment spec; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n_total: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// l1 radius; `inf` drops the constraint
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// complete | star | path | grid2d | erdos_renyi
    #[arg(long)]
    topology: Option<String>,
    /// Edge probability for erdos_renyi
    #[arg(long)]
    p: Option<f64>,
    /// metropolis | lazy_metropolis | uniform
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV dataset (column 0 = y) instead of synthetic data
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    /// Sweep axis: none | lambda | gamma | d | m
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated axis values
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long)]
    band: Option<f64>,
    /// Comma-separated penalties for `convergence`
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Accept stepsizes above the majorization bound
    #[arg(long)]
    no_strict: bool,
}

impl Common {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::from_json_file(path)?,
            None => ExperimentSpec::default(),
        };
        macro_rules! set {
            ($($src:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = &self.$src { spec.$($dst).+ = v.clone(); })*
            };
        }
        set!(
            n_total => data.n_total, d => data.d, sigma => data.sigma, n_test => data.n_test,
            m => network.m, iters => solver.max_iters, seed => seed, out => out, reps => reps,
            band => sweep.band, stride => solver.stride, rel_tol => solver.rel_tol,
        );
        if let Some(v) = self.s {
            spec.data.s = Some(v);
        }
        if let Some(v) = &self.csv {
            spec.data.csv = Some(v.clone());
        }
        spec.solver.lambda = self.lambda.or(spec.solver.lambda);
        spec.solver.gamma = self.gamma.or(spec.solver.gamma);
        spec.solver.beta = self.beta.or(spec.solver.beta);
        spec.solver.radius = self.radius.or(spec.solver.radius);
        match (&self.topology, self.p) {
            (Some(name), p) => spec.network.topology = Topology::parse(name, p)?,
            (None, Some(p)) => match spec.network.topology {
                Topology::ErdosRenyi { .. } => spec.network.topology = Topology::ErdosRenyi { p },
                _ => return Err(Error::InvalidParameter("--p requires --topology erdos_renyi".into())),
            },
            (None, None) => {}
        }
        if self.no_strict {
            spec.solver.strict = false;
        }
        if let Some(w) = &self.weights {
            spec.network.weights = WeightRule::parse(w)?;
        }
        if let Some(a) = &self.axis {
            spec.sweep.axis = serde_json::from_value(serde_json::Value::String(a.to_ascii_lowercase()))
                .map_err(|_| Error::InvalidParameter(format!("unknown sweep axis {a:?}")))?;
        }
        if let Some(g) = &self.grid {
            spec.sweep.grid = g.clone();
        }
        if let Some(g) = &self.gammas {
            spec.sweep.gammas = g.clone();
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn execute(cmd: &Command) -> Result<ExitCode> {
    match cmd {
        Command::Generate(c) => {
            let r = harness::cmd_generate(&c.spec()?)?;
            for f in &r.files {
                println!("{}", f.display());
            }
        }
        Command::Solve(c) => {
            let r = harness::cmd_solve(&c.spec()?)?;
            let last = r.trace.last();
            println!(
                "iterations {} avg_est_err {} consensus_err {:e} objective_G {:e}",
                r.trace.iterations(),
                last.avg_est_err.map_or("-".into(), |v| format!("{v:e}")),
                last.consensus_err,
                last.objective_g
            );
        }
        Command::Sweep(c) => {
            let spec = c.spec()?;
            let r = harness::cmd_sweep(&spec)?;
            println!("{} sweep: {} ({} rows)", spec.sweep.axis.name(), r.note, r.rows.len());
            if !r.band_met {
                let err = Error::BandNotMet(r.note);
                eprintln!("netlasso: {err}");
                return Ok(ExitCode::from(err.exit_code() as u8));
            }
            if spec.sweep.axis == SweepAxis::None {
                println!("band met");
            }
        }
        Command::Convergence(c) => {
            let r = harness::cmd_convergence(&c.spec()?)?;
            for run in &r.runs {
                let pa = run.analysis;
                println!(
                    "gamma {:e}: {} rounds, plateau {}, iterations to plateau {}",
                    run.gamma,
                    run.iterations,
                    pa.map_or("-".into(), |a| format!("{:e}", a.plateau)),
                    pa.map_or("-".into(), |a| a.iters_to_plateau.to_string()),
                );
            }
        }
        Command::Diagnose(c) => {
            let rep = harness::cmd_diagnose(&c.spec()?)?;
            println!("{} entries", rep.0.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("netlasso: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
