//! End-to-end behaviour of the commands and the binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use netlasso::datagen::load_csv;
use netlasso::harness::{
    cmd_convergence, cmd_generate, cmd_solve, cmd_sweep, read_sweep_csv, ExperimentSpec, Manifest, SweepAxis,
    TruthFile, THREADS_ENV,
};
use netlasso::solver::{lasso_objective, read_metrics_csv};

fn small_spec(out: &Path) -> ExperimentSpec {
    let mut spec = ExperimentSpec::default();
    spec.data.n_total = 40;
    spec.data.d = 12;
    spec.data.s = Some(2);
    spec.network.m = 4;
    spec.solver.lambda = Some(0.1);
    spec.solver.gamma = Some(1e-2);
    spec.solver.max_iters = 300;
    spec.reps = 3;
    spec.seed = 13;
    spec.out = out.to_path_buf();
    spec
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netlasso"))
}

fn write_config(dir: &Path, spec: &ExperimentSpec) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, spec.to_json().unwrap()).unwrap();
    path
}

#[test]
fn generate_writes_what_it_built() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    let res = cmd_generate(&spec).unwrap();
    let back = load_csv(&dir.path().join("data.csv")).unwrap();
    assert_eq!(back.x, res.instance.train.x);
    assert_eq!(back.y, res.instance.train.y);
    let truth: TruthFile = serde_json::from_slice(&fs::read(dir.path().join("truth.json")).unwrap()).unwrap();
    assert_eq!(Some(truth.truth), res.instance.truth);
    assert_eq!(truth.seed, 13);
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.command, "generate");
    assert_eq!(manifest.spec, spec);
    assert_eq!(manifest.input_hash.len(), 64);
}

#[test]
fn solve_reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_solve(&small_spec(a.path())).unwrap();
    cmd_solve(&small_spec(b.path())).unwrap();
    let ta = fs::read(a.path().join("trace.csv")).unwrap();
    assert_eq!(ta, fs::read(b.path().join("trace.csv")).unwrap());
    let rows = read_metrics_csv(ta.as_slice()).unwrap();
    assert_eq!(rows.len(), 301);
    assert!(rows.iter().all(|r| r.elapsed_ms.is_none()));
}

#[test]
fn single_agent_trace_is_the_lasso_objective() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(dir.path());
    spec.network.m = 1;
    let res = cmd_solve(&spec).unwrap();
    // With one agent the consensus term vanishes and G is the LASSO objective.
    let mut it = netlasso::solver::IstaIteration::new(
        &res.instance.train.x,
        &res.instance.train.y,
        &netlasso::solver::IstaConfig {
            lambda: 0.1,
            beta: res.trace.config.beta,
            max_iters: 300,
            tol: 0.0,
            radius: Some(res.trace.config.radius).filter(|r| r.is_finite()),
            strict: true,
        },
        None,
    )
    .unwrap();
    for row in &res.trace.metrics {
        while it.iteration() < row.iter {
            it.step().unwrap();
        }
        let want = lasso_objective(&res.instance.train.x, &res.instance.train.y, it.theta(), 0.1);
        assert!((row.objective_g - want).abs() <= 1e-12 * want.max(1.0), "round {}", row.iter);
        assert_eq!(row.consensus_err, 0.0);
    }
}

#[test]
fn sweep_csv_matches_the_returned_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(dir.path());
    spec.sweep.axis = SweepAxis::Lambda;
    spec.sweep.grid = vec![0.05, 0.1, 0.2];
    spec.sweep.band = 0.5;
    let res = cmd_sweep(&spec).unwrap();
    let rows = read_sweep_csv(fs::File::open(dir.path().join("sweep.csv")).unwrap()).unwrap();
    assert_eq!(rows, res.rows);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.reps == 3 && r.dist_err_mean.is_some()));
}

#[test]
fn convergence_writes_one_trace_per_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(dir.path());
    spec.sweep.gammas = vec![1e-1, 1e-2];
    let res = cmd_convergence(&spec).unwrap();
    assert_eq!(res.runs.len(), 2);
    for run in &res.runs {
        assert!(dir.path().join(&run.file).exists());
    }
    let refs = fs::read_to_string(dir.path().join("references.csv")).unwrap();
    let mut lines = refs.lines();
    assert_eq!(lines.next(), Some("reference,lambda,avg_est_err,mse_test"));
    assert!(lines.next().unwrap().starts_with("centralized,"));
    assert!(lines.next().unwrap().starts_with("local,"));
}

#[test]
fn thread_count_does_not_change_outputs() {
    let root = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = root.path().join(format!("t{threads}"));
        fs::create_dir_all(&out).unwrap();
        let mut spec = small_spec(&out);
        spec.sweep.axis = SweepAxis::Lambda;
        spec.sweep.grid = vec![0.05, 0.2];
        spec.reps = 6;
        let cfg = write_config(&out, &spec);
        let status = bin().arg("sweep").arg("--config").arg(&cfg).arg("--band").arg("10").env(THREADS_ENV, threads).output().unwrap().status;
        assert!(status.success());
        outputs.push(fs::read(out.join("sweep.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_spec(dir.path()));
    let run = |args: &[&str], env: Option<(&str, &str)>| {
        let mut cmd = bin();
        cmd.args(args).arg("--config").arg(&cfg);
        if let Some((k, v)) = env {
            cmd.env(k, v);
        }
        cmd.output().unwrap().status.code()
    };
    assert_eq!(run(&["solve"], None), Some(0));
    // 41 samples cannot be split over 4 agents.
    assert_eq!(run(&["solve", "--N", "41"], None), Some(2));
    assert_eq!(run(&["solve", "--beta", "1"], None), Some(2));
    assert_eq!(run(&["sweep", "--axis", "lambda", "--grid", "0.1"], Some((THREADS_ENV, "0"))), Some(2));
    assert_eq!(run(&["solve", "--beta", "50", "--no-strict", "--radius", "inf", "--iters", "2000"], None), Some(3));
    // Five rounds from zero cannot come near the centralized error.
    assert_eq!(run(&["sweep", "--iters", "5", "--band", "0.01"], None), Some(4));
}

#[test]
fn command_line_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_spec(dir.path()));
    let status = bin()
        .args(["solve", "--iters", "7", "--stride", "3", "--topology", "path", "--weights", "metropolis", "--config"])
        .arg(&cfg)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.spec.solver.max_iters, 7);
    let rows = read_metrics_csv(fs::File::open(dir.path().join("trace.csv")).unwrap()).unwrap();
    assert_eq!(rows.iter().map(|r| r.iter).collect::<Vec<_>>(), vec![0, 3, 6, 7]);
}
