use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::analysis::{last_passing, mean_std, PlateauAnalysis};
use super::instance::{rep_seed, rsc_seed, Instance, LocalReference};
use super::spec::{ExperimentSpec, SweepAxis};
use crate::datagen::{default_sparsity, GroundTruth};
use crate::error::{Error, Result};
use crate::solver::{self, DgdIteration, IstaResult, RunTrace, SolverConfig, StackedState};
use crate::theory::{self, SolvedInstance};

/// Environment variable bounding the worker pool.
pub const THREADS_ENV: &str = "NETLASSO_THREADS";

/// Pool sized by `NETLASSO_THREADS`, or rayon's default when unset.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| Error::invalid(format!("{THREADS_ENV}={v:?} is not a count")))?;
        if n == 0 {
            return Err(Error::invalid(format!("{THREADS_ENV} must be at least 1")));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::invalid(format!("cannot build worker pool: {e}")))
}

/// Runs `f` over `0..n` on the pool and returns results in index order.
fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    worker_pool()?.install(|| (0..n).into_par_iter().map(f).collect())
}

/// Git-blob-style SHA-256 of the spec JSON followed by any input CSV bytes.
pub fn input_hash(spec: &ExperimentSpec) -> Result<String> {
    let mut bytes = serde_json::to_vec(spec)?;
    if let Some(path) = &spec.data.csv {
        bytes.extend(fs::read(path)?);
    }
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(&bytes);
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Run record written next to every command's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub input_hash: String,
    pub spec: ExperimentSpec,
    pub config: Option<SolverConfig>,
    pub outputs: Vec<String>,
    pub summary: Value,
}

impl Manifest {
    fn new(command: &str, spec: &ExperimentSpec, config: Option<SolverConfig>, outputs: Vec<String>, summary: Value) -> Result<Self> {
        Ok(Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            input_hash: input_hash(spec)?,
            spec: spec.clone(),
            config,
            outputs,
            summary,
        })
    }

    fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("manifest.json"), self)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

fn out_dir(spec: &ExperimentSpec) -> Result<PathBuf> {
    fs::create_dir_all(&spec.out)?;
    Ok(spec.out.clone())
}

fn write_trace(path: &Path, trace: &RunTrace) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    trace.write_csv(&mut f)?;
    f.flush()?;
    Ok(())
}

/// Final error of a trace: estimation error when the truth is known, else test MSE.
fn trace_score(trace: &RunTrace) -> Result<f64> {
    let last = trace.last();
    last.avg_est_err.or(last.mse_test).ok_or_else(|| Error::invalid("no ground truth and no test set: nothing to score"))
}

fn central_score(inst: &Instance, central: &IstaResult) -> Result<f64> {
    if let Some(e) = inst.error_of(&central.theta) {
        return Ok(e);
    }
    let test = inst.test.as_ref().ok_or_else(|| Error::invalid("no ground truth and no test set: nothing to score"))?;
    Ok((&test.y - &test.x * &central.theta).norm_squared() / test.samples() as f64)
}

// ---------------------------------------------------------------- generate

/// Contents of `truth.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub seed: u64,
    pub sigma: f64,
    pub phi: f64,
    #[serde(flatten)]
    pub truth: GroundTruth,
}

#[derive(Clone, Debug)]
pub struct GenerateResult {
    pub instance: Instance,
    pub files: Vec<PathBuf>,
}

/// Writes `data.csv` (and `truth.json` for synthetic data).
pub fn cmd_generate(spec: &ExperimentSpec) -> Result<GenerateResult> {
    let dir = out_dir(spec)?;
    let inst = Instance::build(spec, spec.seed)?;
    let mut files = vec![dir.join("data.csv")];
    inst.train.write_csv(&files[0])?;
    if let Some(truth) = &inst.truth {
        let tf = TruthFile { seed: spec.seed, sigma: spec.data.sigma, phi: spec.data.phi, truth: truth.clone() };
        files.push(dir.join("truth.json"));
        write_json(&files[1], &tf)?;
    }
    let names = files.iter().map(|p| file_name(p)).collect();
    let summary = json!({"N": inst.train.samples(), "d": inst.train.dim(), "s": inst.s});
    Manifest::new("generate", spec, None, names, summary)?.write(&dir)?;
    Ok(GenerateResult { instance: inst, files })
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

// ------------------------------------------------------------------- solve

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub instance: Instance,
    pub trace: RunTrace,
}

/// Single distributed run; writes `trace.csv` and `manifest.json`.
pub fn cmd_solve(spec: &ExperimentSpec) -> Result<SolveResult> {
    let dir = out_dir(spec)?;
    let inst = Instance::build(spec, spec.seed)?;
    let cfg = inst.resolve(spec)?;
    let init = inst.initial_state(spec.solver.init, cfg.lambda, None)?;
    let trace = inst.run(&cfg, init)?;
    write_trace(&dir.join("trace.csv"), &trace)?;
    let last = trace.last();
    let summary = json!({
        "iterations": trace.iterations(),
        "stop": trace.stop,
        "rho": inst.w.rho(),
        "lambda_min_w": inst.w.lambda_min(),
        "l_max": inst.shards.l_max()?,
        "final": last,
    });
    Manifest::new("solve", spec, Some(cfg), vec!["trace.csv".into()], summary)?.write(&dir)?;
    Ok(SolveResult { instance: inst, trace })
}

// ------------------------------------------------------------------- sweep

/// One row of `sweep.csv`. Cells that do not apply to the axis are empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub n_total: usize,
    pub reps: usize,
    pub dist_err_mean: Option<f64>,
    pub dist_err_std: Option<f64>,
    pub central_err_mean: f64,
    pub central_err_std: f64,
    pub gamma: Option<f64>,
    pub gamma_crit: Option<f64>,
    pub inv_gamma_crit: Option<f64>,
    pub rounds_mean: Option<f64>,
    pub rounds_std: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub band: f64,
    pub rows: Vec<SweepRow>,
    /// Whether the axis-specific accuracy target was reached.
    pub band_met: bool,
    pub note: String,
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Csv { path: "sweep.csv".into(), msg: e.to_string() }))
        .collect()
}

/// Data, network and centralized baseline of one repetition.
struct RepContext {
    inst: Instance,
    central: IstaResult,
    central_score: f64,
    lambda: f64,
}

fn rep_contexts(spec: &ExperimentSpec) -> Result<Vec<RepContext>> {
    par_map(spec.reps, |r| {
        let inst = Instance::build(spec, rep_seed(spec.seed, r))?;
        let lambda = inst.resolve_lambda(spec)?;
        let central = inst.centralized(lambda)?;
        let central_score = central_score(&inst, &central)?;
        Ok(RepContext { inst, central, central_score, lambda })
    })
}

/// Final distributed error of every repetition at penalty `gamma`.
fn eval_gamma(spec: &ExperimentSpec, ctxs: &[RepContext], gamma: f64) -> Result<Vec<f64>> {
    let mut s = spec.clone();
    s.solver.gamma = Some(gamma);
    par_map(ctxs.len(), |r| {
        let c = &ctxs[r];
        let mut local = s.clone();
        local.solver.lambda = Some(c.lambda);
        let mut cfg = c.inst.resolve(&local)?;
        cfg.metric_stride = cfg.max_iters.max(1);
        let init = c.inst.initial_state(spec.solver.init, c.lambda, Some(&c.central))?;
        trace_score(&c.inst.run(&cfg, init)?)
    })
}

fn central_stats(ctxs: &[RepContext]) -> (f64, f64) {
    mean_std(&ctxs.iter().map(|c| c.central_score).collect::<Vec<_>>())
}

/// Largest gamma on the spec's log grid whose mean error is within the band.
fn critical_gamma(spec: &ExperimentSpec, ctxs: &[RepContext]) -> Result<(Option<f64>, Vec<(f64, f64, f64)>)> {
    let grid = spec.sweep.gamma_grid.points()?;
    let (central, _) = central_stats(ctxs);
    let mut evaluated = Vec::new();
    let idx = last_passing(grid.len(), |i| {
        let (mean, std) = mean_std(&eval_gamma(spec, ctxs, grid[i])?);
        evaluated.push((grid[i], mean, std));
        Ok::<_, Error>(mean <= (1.0 + spec.sweep.band) * central)
    })?;
    evaluated.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok((idx.map(|i| grid[i]), evaluated))
}

fn row(value: f64, n_total: usize, reps: usize, central: (f64, f64)) -> SweepRow {
    SweepRow {
        axis_value: value,
        n_total,
        reps,
        dist_err_mean: None,
        dist_err_std: None,
        central_err_mean: central.0,
        central_err_std: central.1,
        gamma: None,
        gamma_crit: None,
        inv_gamma_crit: None,
        rounds_mean: None,
        rounds_std: None,
    }
}

/// `N = round(s ln d / ratio)`, rounded to a positive multiple of `m`.
pub(crate) fn adjusted_samples(d: usize, ratio: f64, m: usize) -> usize {
    let s = default_sparsity(d) as f64;
    let raw = s * (d as f64).ln() / ratio;
    ((raw / m as f64).round() as usize).max(1) * m
}

/// Runs the sweep described by `spec.sweep`; writes `sweep.csv` and `manifest.json`.
///
/// An unmet band is reported through [`SweepResult::band_met`], not as an error.
pub fn cmd_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let dir = out_dir(spec)?;
    let band = spec.sweep.band;
    let (rows, band_met, note) = match spec.sweep.axis {
        SweepAxis::None => {
            let ctxs = rep_contexts(spec)?;
            let mut r = row(ctxs[0].lambda, spec.data.n_total, spec.reps, central_stats(&ctxs));
            let gamma = ctxs[0].inst.resolve(spec)?.gamma;
            let errs = eval_gamma(spec, &ctxs, gamma)?;
            let (m, s) = mean_std(&errs);
            r.dist_err_mean = Some(m);
            r.dist_err_std = Some(s);
            r.gamma = Some(gamma);
            let met = m <= (1.0 + band) * r.central_err_mean;
            let note = format!("distributed/centralized = {:.4}", m / r.central_err_mean);
            (vec![r], met, note)
        }
        SweepAxis::Lambda => {
            let mut rows = Vec::new();
            for &lambda in &spec.sweep.grid {
                let mut s = spec.clone();
                s.solver.lambda = Some(lambda);
                let ctxs = rep_contexts(&s)?;
                let gamma = ctxs[0].inst.resolve(&s)?.gamma;
                let (m, sd) = mean_std(&eval_gamma(&s, &ctxs, gamma)?);
                let mut r = row(lambda, s.data.n_total, s.reps, central_stats(&ctxs));
                r.dist_err_mean = Some(m);
                r.dist_err_std = Some(sd);
                r.gamma = Some(gamma);
                rows.push(r);
            }
            let dist_min = rows.iter().filter_map(|r| r.dist_err_mean).fold(f64::INFINITY, f64::min);
            let central_min = rows.iter().map(|r| r.central_err_mean).fold(f64::INFINITY, f64::min);
            let ratio = dist_min / central_min;
            (rows, ratio <= 1.0 + band, format!("min distributed / min centralized = {ratio:.4}"))
        }
        SweepAxis::Gamma => {
            let ctxs = rep_contexts(spec)?;
            let central = central_stats(&ctxs);
            let evaluated = if spec.sweep.grid.is_empty() {
                critical_gamma(spec, &ctxs)?.1
            } else {
                let mut v = Vec::new();
                for &g in &spec.sweep.grid {
                    let (m, s) = mean_std(&eval_gamma(spec, &ctxs, g)?);
                    v.push((g, m, s));
                }
                v
            };
            let crit = evaluated.iter().filter(|e| e.1 <= (1.0 + band) * central.0).map(|e| e.0).fold(None, |a: Option<f64>, g| Some(a.map_or(g, |x| x.max(g))));
            let rows = evaluated
                .iter()
                .map(|&(g, m, s)| {
                    let mut r = row(g, spec.data.n_total, spec.reps, central);
                    r.dist_err_mean = Some(m);
                    r.dist_err_std = Some(s);
                    r.gamma = Some(g);
                    r.gamma_crit = crit;
                    r.inv_gamma_crit = crit.map(|c| 1.0 / c);
                    r
                })
                .collect();
            (rows, crit.is_some(), format!("critical gamma = {crit:?}"))
        }
        SweepAxis::D => {
            let mut rows = Vec::new();
            let mut all = true;
            for &dv in &spec.sweep.grid {
                let d = dv.round() as usize;
                let mut s = spec.clone();
                s.data.d = d;
                s.data.s = None;
                if let Some(ratio) = spec.sweep.n_ratio {
                    s.data.n_total = adjusted_samples(d, ratio, spec.network.m);
                }
                let ctxs = rep_contexts(&s)?;
                let (crit, evaluated) = critical_gamma(&s, &ctxs)?;
                let mut r = row(d as f64, s.data.n_total, s.reps, central_stats(&ctxs));
                if let Some(&(g, m, sd)) = evaluated.iter().find(|e| Some(e.0) == crit) {
                    r.dist_err_mean = Some(m);
                    r.dist_err_std = Some(sd);
                    r.gamma = Some(g);
                }
                r.gamma_crit = crit;
                r.inv_gamma_crit = crit.map(|c| 1.0 / c);
                all &= crit.is_some();
                rows.push(r);
            }
            let crits: Vec<String> = rows.iter().map(|r| format!("d={} -> {:?}", r.axis_value, r.gamma_crit)).collect();
            (rows, all, crits.join(", "))
        }
        SweepAxis::M => {
            let mut rows = Vec::new();
            let mut all = true;
            for &mv in &spec.sweep.grid {
                let mut s = spec.clone();
                s.network.m = mv.round() as usize;
                let ctxs = rep_contexts(&s)?;
                let central = central_stats(&ctxs);
                let per_rep = par_map(ctxs.len(), |r| rounds_to_band(&s, &ctxs[r]))?;
                let rounds: Option<Vec<f64>> = per_rep.iter().map(|p| p.0.map(|k| k as f64)).collect();
                let finals: Vec<f64> = per_rep.iter().map(|p| p.1).collect();
                let (fm, fs) = mean_std(&finals);
                let mut r = row(s.network.m as f64, s.data.n_total, s.reps, central);
                r.dist_err_mean = Some(fm);
                r.dist_err_std = Some(fs);
                r.gamma = Some(per_rep[0].2);
                if let Some(k) = &rounds {
                    let (rm, rs) = mean_std(k);
                    r.rounds_mean = Some(rm);
                    r.rounds_std = Some(rs);
                }
                all &= rounds.is_some();
                rows.push(r);
            }
            (rows, all, "rounds to reach (1 + band) x centralized error".into())
        }
    };
    let mut f = BufWriter::new(File::create(dir.join("sweep.csv"))?);
    write_sweep_csv(&rows, &mut f)?;
    f.flush()?;
    let result = SweepResult { axis: spec.sweep.axis, band, rows, band_met, note };
    let summary = json!({"band_met": result.band_met, "note": result.note});
    Manifest::new("sweep", spec, None, vec!["sweep.csv".into()], summary)?.write(&dir)?;
    Ok(result)
}

/// `(first round inside the band, final error, gamma)` for one repetition.
fn rounds_to_band(spec: &ExperimentSpec, c: &RepContext) -> Result<(Option<usize>, f64, f64)> {
    let mut local = spec.clone();
    local.solver.lambda = Some(c.lambda);
    let cfg = c.inst.resolve(&local)?;
    let target = (1.0 + spec.sweep.band) * c.central_score;
    let init = c.inst.initial_state(spec.solver.init, c.lambda, Some(&c.central))?;
    let mut it = DgdIteration::new(&c.inst.shards, &c.inst.w, &cfg, init)?;
    let score = |st: &StackedState| -> Result<f64> {
        match (&c.inst.truth, &c.inst.test) {
            (Some(t), _) => Ok(st.avg_est_err(&t.vector())),
            (None, Some(_)) => Ok(solver::metrics(st, None, c.inst.test.as_ref()).mse_test.unwrap_or(f64::NAN)),
            _ => Err(Error::invalid("no ground truth and no test set: nothing to score")),
        }
    };
    let mut err = score(it.state())?;
    let mut hit = (err <= target).then_some(0);
    for t in 1..=cfg.max_iters {
        if hit.is_some() {
            break;
        }
        it.step()?;
        err = score(it.state())?;
        if err <= target {
            hit = Some(t);
        }
    }
    Ok((hit, err, cfg.gamma))
}

// ------------------------------------------------------------- convergence

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRun {
    pub gamma: f64,
    pub beta: f64,
    pub iterations: usize,
    pub file: String,
    pub final_consensus_err: f64,
    pub analysis: Option<PlateauAnalysis>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceResult {
    pub lambda: f64,
    pub lambda_local: f64,
    pub centralized: Option<f64>,
    pub centralized_mse: Option<f64>,
    pub local: LocalReference,
    pub runs: Vec<ConvergenceRun>,
    pub traces: Vec<RunTrace>,
}

/// Runs one instance across `spec.sweep.gammas`; writes `trace_<gamma>.csv`
/// per penalty plus `references.csv`.
pub fn cmd_convergence(spec: &ExperimentSpec) -> Result<ConvergenceResult> {
    let dir = out_dir(spec)?;
    let inst = Instance::build(spec, spec.seed)?;
    let lambda = inst.resolve_lambda(spec)?;
    let central = inst.centralized(lambda)?;
    let centralized = inst.error_of(&central.theta);
    let centralized_mse = inst.test.as_ref().map(|t| (&t.y - &t.x * &central.theta).norm_squared() / t.samples() as f64);
    // Same selection rule at the local sample size n = N/m.
    let lambda_local = lambda * (inst.shards.m as f64).sqrt();
    let local = inst.local_reference(lambda_local)?;

    let gammas = &spec.sweep.gammas;
    let traces = par_map(gammas.len(), |k| {
        let gamma = gammas[k];
        let mut s = spec.clone();
        s.solver.lambda = Some(lambda);
        s.solver.gamma = Some(gamma);
        if let Some(c) = spec.sweep.budget_gamma {
            s.solver.max_iters = (c / gamma).ceil() as usize;
        }
        if let Some(p) = spec.sweep.points_per_trace {
            s.solver.stride = (s.solver.max_iters / p.max(1)).max(1);
        }
        let cfg = inst.resolve(&s)?;
        let init = inst.initial_state(spec.solver.init, lambda, Some(&central))?;
        inst.run(&cfg, init)
    })?;

    let mut runs = Vec::new();
    for (trace, &gamma) in traces.iter().zip(gammas) {
        let file = format!("trace_{gamma:e}.csv");
        write_trace(&dir.join(&file), trace)?;
        runs.push(ConvergenceRun {
            gamma,
            beta: trace.config.beta,
            iterations: trace.iterations(),
            file,
            final_consensus_err: trace.last().consensus_err,
            analysis: PlateauAnalysis::of_trace(&trace.metrics, spec.sweep.plateau_tol),
        });
    }

    let mut w = csv::Writer::from_path(dir.join("references.csv")).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let cell = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["reference", "lambda", "avg_est_err", "mse_test"]).map_err(to_io)?;
    w.write_record(["centralized".into(), format!("{lambda:e}"), cell(centralized), cell(centralized_mse)]).map_err(to_io)?;
    w.write_record(["local".into(), format!("{lambda_local:e}"), cell(local.avg_est_err), cell(local.mse_test)]).map_err(to_io)?;
    w.flush()?;

    let mut outputs: Vec<String> = runs.iter().map(|r| r.file.clone()).collect();
    outputs.push("references.csv".into());
    let summary = json!({"lambda": lambda, "centralized": centralized, "local": local.avg_est_err, "runs": runs});
    Manifest::new("convergence", spec, None, outputs, summary)?.write(&dir)?;
    Ok(ConvergenceResult { lambda, lambda_local, centralized, centralized_mse, local, runs, traces })
}

// ---------------------------------------------------------------- diagnose

/// Number of random directions probed by the RSC falsification check.
const RSC_DIRECTIONS: usize = 2000;

/// Evaluates every rule and bound on the spec's instance, solving it first
/// when the truth is known; writes `diagnostics.json`.
pub fn cmd_diagnose(spec: &ExperimentSpec) -> Result<theory::DiagnosticsReport> {
    let dir = out_dir(spec)?;
    let inst = Instance::build(spec, spec.seed)?;
    let mut report = match inst.theory_inputs(spec) {
        Ok(inp) => diagnose_instance(spec, &inst, &inp)?,
        Err(e) => {
            let mut rep = theory::DiagnosticsReport::default();
            rep.insert::<f64>("theory_inputs", "validated problem summary", Value::Null, &Err(e));
            rep
        }
    };
    report.insert(
        "network",
        "rho = max(|lambda_2(W)|, |lambda_min(W)|)",
        json!({"topology": inst.graph.topology().to_string(), "m": inst.shards.m, "weights": spec.network.weights}),
        &Ok(json!({"rho": inst.w.rho(), "lambda_min_w": inst.w.lambda_min(), "edges": inst.graph.edges().len()})),
    );
    write_json(&dir.join("diagnostics.json"), &report)?;
    Manifest::new("diagnose", spec, None, vec!["diagnostics.json".into()], Value::Null)?.write(&dir)?;
    Ok(report)
}

fn diagnose_instance(spec: &ExperimentSpec, inst: &Instance, inp: &theory::TheoryInputs) -> Result<theory::DiagnosticsReport> {
    let rsc_slack = inp.rsc().and_then(|rsc| theory::rsc_check(&inst.train.x, rsc, RSC_DIRECTIONS, rsc_seed(spec.seed))).ok();
    let Some(truth) = &inst.truth else {
        return Ok(theory::diagnostics(inp, None, None, rsc_slack));
    };
    let cfg = inst.resolve(spec)?;
    let init = inst.initial_state(spec.solver.init, cfg.lambda, None)?;
    let start = init.clone().unwrap_or_else(|| StackedState::zeros(inst.shards.m, inst.shards.dim()));
    let mut run_cfg = cfg.clone();
    run_cfg.metric_stride = cfg.max_iters.max(1);
    let trace = inst.run(&run_cfg, init)?;
    let (_, g0) = solver::evaluate_objective(&start, &inst.shards, &inst.w, &cfg)?;
    let (_, g1) = solver::evaluate_objective(&trace.final_state, &inst.shards, &inst.w, &cfg)?;
    let delta = trace.final_state.difference(&StackedState::consensual(inst.shards.m, &truth.vector()))?;
    let noise_corr_max = inst.shards.noise_correlation_max()?;
    let solved = SolvedInstance {
        lambda: cfg.lambda,
        gamma: cfg.gamma,
        beta: cfg.beta,
        radius: cfg.radius,
        avg_err: trace.final_state.avg_est_err(&truth.vector()),
        noise_corr_max,
        cone_residual: theory::cone_membership(&delta, truth, cfg.gamma, cfg.lambda, &inst.shards, inst.w.rho())?,
        eta0: g0 - g1,
    };
    let mut rep = theory::diagnostics(inp, Some(&solved), Some(truth.l1_norm), rsc_slack);
    let floor = theory::lambda_noise_floor(&inst.shards);
    rep.insert(
        "lambda_noise_floor",
        "2 ||X^T w||_inf / N <= lambda",
        json!({"lambda": cfg.lambda}),
        &floor.map(|f| json!({"floor": f, "holds": f <= cfg.lambda})),
    );
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjusted_samples_hold_the_ratio() {
        let n1 = adjusted_samples(360, 0.1, 5);
        let n2 = adjusted_samples(800, 0.1, 5);
        assert_eq!(n1 % 5, 0);
        assert_eq!(n2 % 5, 0);
        // s = 6, 7 and ln d = 5.886, 6.685
        assert_eq!(n1, 355);
        assert_eq!(n2, 470);
    }

    #[test]
    fn sweep_csv_round_trip() {
        let rows = vec![
            SweepRow {
                axis_value: 0.1,
                n_total: 220,
                reps: 3,
                dist_err_mean: Some(1.0 / 3.0),
                dist_err_std: Some(0.0),
                central_err_mean: 2e-300,
                central_err_std: 1.5,
                gamma: Some(5e-4),
                gamma_crit: None,
                inv_gamma_crit: None,
                rounds_mean: None,
                rounds_std: None,
            },
            SweepRow { axis_value: 360.0, gamma_crit: Some(1e-3), inv_gamma_crit: Some(1e3), ..row(0.0, 5, 1, (0.5, 0.0)) },
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_sweep_csv(buf.as_slice()).unwrap(), rows);
    }
}
