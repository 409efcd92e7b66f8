//! Distributed proximal gradient on the penalized consensus objective
//!
//! ```text
//! G(theta) = (1/2N) sum_i ||y_i - X_i theta_i||^2
//!          + (1/2m gamma) theta^T ((I - W) ⊗ I) theta
//!          + (lambda/m) sum_i ||theta_i||_1,     ||theta_i||_1 <= R.
//! ```
//!
//! Each round, agent `i` forms
//! `psi_i = theta_i - (beta/gamma)(theta_i - sum_j w_ij theta_j) - beta grad f_i(theta_i)`
//! and sets `theta_i <- constrained_prox(psi_i, beta lambda, R)`.

mod centralized;
mod kernels;
mod state;
mod trace;

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use centralized::{
    centralized_ista, lasso_objective, max_stepsize, zero_solution_lambda, IstaConfig, IstaIteration, IstaResult,
};
pub use state::StackedState;
pub use trace::{read_metrics_csv, write_metrics_csv, IterationMetrics, RunTrace, StopReason, TRACE_COLUMNS};

use crate::datagen::{AgentShards, Dataset, GroundTruth, Shard};
use crate::error::{Error, Result};
use crate::graph::GossipMatrix;
use crate::proxops::constrained_prox_in_place;
use kernels::least_squares_gradient;

/// Serializes non-finite radii (the unconstrained case) as `null`.
mod radius_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &f64, s: S) -> Result<S::Ok, S::Error> {
        if r.is_finite() {
            s.serialize_f64(*r)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub lambda: f64,
    pub gamma: f64,
    pub beta: f64,
    /// l1 radius `R`; `f64::INFINITY` drops the constraint.
    #[serde(with = "radius_serde")]
    pub radius: f64,
    pub max_iters: usize,
    /// Stop once `||theta^{t+1} - theta^t|| <= rel_tol ||theta^t||`; 0 disables.
    pub rel_tol: f64,
    pub seed: u64,
    /// Which rule (or the user) produced each parameter.
    pub provenance: BTreeMap<String, String>,
    /// Reject stepsizes above `gamma / (gamma L_max + 1 - lambda_min(W))`.
    pub strict: bool,
    /// Record metrics every `metric_stride` rounds (plus the first and last).
    pub metric_stride: usize,
    /// Fill the `elapsed_ms` column. Off by default so traces are reproducible.
    pub record_timing: bool,
    /// Update agents on the rayon pool. Results are bit-identical either way.
    pub parallel: bool,
}

impl SolverConfig {
    pub fn new(lambda: f64, gamma: f64, beta: f64, radius: f64, max_iters: usize) -> Self {
        Self {
            lambda,
            gamma,
            beta,
            radius,
            max_iters,
            rel_tol: 0.0,
            seed: 0,
            provenance: BTreeMap::new(),
            strict: true,
            metric_stride: 1,
            record_timing: false,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64| Err(Error::invalid(format!("{name} out of range: {v}")));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda", self.lambda);
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma", self.gamma);
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta", self.beta);
        }
        if !(self.radius > 0.0) {
            return bad("radius", self.radius);
        }
        if !(self.rel_tol >= 0.0) {
            return bad("rel_tol", self.rel_tol);
        }
        if self.metric_stride == 0 {
            return Err(Error::invalid("metric_stride must be at least 1"));
        }
        Ok(())
    }
}

/// Largest stepsize for which the linearized surrogate majorizes `G`.
pub fn stepsize_bound(gamma: f64, l_max: f64, lambda_min_w: f64) -> f64 {
    gamma / (gamma * l_max + 1.0 - lambda_min_w)
}

/// `grad f_i(theta) = X_i^T (X_i theta - y_i) / n`.
pub fn local_gradient(shard: &Shard, theta: &DVector<f64>) -> Result<DVector<f64>> {
    if theta.len() != shard.x.ncols() {
        return Err(Error::dims(format!("theta has length {}, shard has {} columns", theta.len(), shard.x.ncols())));
    }
    let mut grad = DVector::zeros(theta.len());
    least_squares_gradient(&shard.x.transpose(), shard.y.as_slice(), theta.as_slice(), grad.as_mut_slice());
    Ok(grad)
}

fn check_shapes(state: &StackedState, w: &GossipMatrix, shards: &AgentShards) -> Result<()> {
    if state.agents() != shards.m || w.agents() != shards.m {
        return Err(Error::dims(format!(
            "state has {} agents, W is {}x{0}, data has {} shards",
            state.agents(),
            w.agents(),
            shards.m
        )));
    }
    if state.dim() != shards.dim() {
        return Err(Error::dims(format!("state dimension {} vs data dimension {}", state.dim(), shards.dim())));
    }
    Ok(())
}

struct Scratch {
    mix: DVector<f64>,
    grad: DVector<f64>,
}

/// Stateful driver for the synchronous rounds.
pub struct DgdIteration<'a> {
    shards: &'a AgentShards,
    w: &'a GossipMatrix,
    /// `X_i^T` per agent, so each sample row is contiguous.
    xts: Vec<DMatrix<f64>>,
    /// Mixing through one dense product instead of per-neighbour updates.
    dense_mixing: bool,
    stacked: DMatrix<f64>,
    mixed: DMatrix<f64>,
    lambda: f64,
    gamma: f64,
    beta: f64,
    radius: f64,
    parallel: bool,
    state: StackedState,
    next: Vec<DVector<f64>>,
    scratch: Vec<Scratch>,
}

impl<'a> DgdIteration<'a> {
    pub fn new(shards: &'a AgentShards, w: &'a GossipMatrix, cfg: &SolverConfig, init: Option<StackedState>) -> Result<Self> {
        cfg.validate()?;
        let state = init.unwrap_or_else(|| StackedState::zeros(shards.m, shards.dim()));
        check_shapes(&state, w, shards)?;
        if cfg.strict {
            let bound = stepsize_bound(cfg.gamma, shards.l_max()?, w.lambda_min());
            if cfg.beta > bound * (1.0 + 1e-12) {
                return Err(Error::Stepsize { beta: cfg.beta, bound });
            }
        }
        let (m, d) = (shards.m, shards.dim());
        let nnz: usize = (0..m).map(|i| w.row(i).len()).sum();
        let dense_mixing = 2 * nnz >= m * m;
        let scratch = (0..m).map(|_| Scratch { mix: DVector::zeros(d), grad: DVector::zeros(d) }).collect();
        let (sd, sm) = if dense_mixing { (d, m) } else { (0, 0) };
        Ok(Self {
            shards,
            w,
            xts: shards.shards.iter().map(|s| s.x.transpose()).collect(),
            dense_mixing,
            stacked: DMatrix::zeros(sd, sm),
            mixed: DMatrix::zeros(sd, sm),
            lambda: cfg.lambda,
            gamma: cfg.gamma,
            beta: cfg.beta,
            radius: cfg.radius,
            parallel: cfg.parallel,
            next: state.blocks.clone(),
            state,
            scratch,
        })
    }

    pub fn state(&self) -> &StackedState {
        &self.state
    }

    pub fn into_state(self) -> StackedState {
        self.state
    }

    /// One synchronous round. Returns `(||theta^{t+1} - theta^t||^2, ||theta^t||^2)`.
    pub fn step(&mut self) -> Result<(f64, f64)> {
        if self.dense_mixing {
            for (i, b) in self.state.blocks.iter().enumerate() {
                self.stacked.column_mut(i).copy_from(b);
            }
            // W is symmetric, so column i of Theta W is sum_j w_ij theta_j.
            self.mixed.gemm(1.0, &self.stacked, self.w.dense(), 0.0);
        }
        let blocks = &self.state.blocks;
        let (w, shards, xts) = (self.w, self.shards, &self.xts);
        let mixed = self.dense_mixing.then_some(&self.mixed);
        let (c, beta, t, r) = (self.beta / self.gamma, self.beta, self.beta * self.lambda, self.radius);
        let update = |i: usize, out: &mut DVector<f64>, s: &mut Scratch| {
            let theta = blocks[i].as_slice();
            let mix = match mixed {
                Some(mat) => &mat.as_slice()[i * mat.nrows()..(i + 1) * mat.nrows()],
                None => {
                    s.mix.fill(0.0);
                    for &(j, wij) in w.row(i) {
                        s.mix.axpy(wij, &blocks[j], 1.0);
                    }
                    s.mix.as_slice()
                }
            };
            least_squares_gradient(&xts[i], shards.shards[i].y.as_slice(), theta, s.grad.as_mut_slice());
            for (((o, th), mx), g) in out.iter_mut().zip(theta).zip(mix).zip(s.grad.iter()) {
                *o = th - c * (th - mx) - beta * g;
            }
            constrained_prox_in_place(out.as_mut_slice(), t, r);
        };
        if self.parallel {
            self.next.par_iter_mut().zip(self.scratch.par_iter_mut()).enumerate().for_each(|(i, (o, s))| update(i, o, s));
        } else {
            for (i, (o, s)) in self.next.iter_mut().zip(self.scratch.iter_mut()).enumerate() {
                update(i, o, s);
            }
        }
        self.state.iteration += 1;
        let mut change = 0.0;
        let mut norm = 0.0;
        for (i, (new, old)) in self.next.iter().zip(&self.state.blocks).enumerate() {
            if new.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { iter: self.state.iteration, agent: i });
            }
            for (a, b) in new.iter().zip(old.iter()) {
                change += (a - b) * (a - b);
                norm += b * b;
            }
        }
        std::mem::swap(&mut self.state.blocks, &mut self.next);
        Ok((change, norm))
    }
}

/// One synchronous round from `state`.
pub fn dgd_step(state: &StackedState, w: &GossipMatrix, shards: &AgentShards, cfg: &SolverConfig) -> Result<StackedState> {
    let mut it = DgdIteration::new(shards, w, cfg, Some(state.clone()))?;
    it.step()?;
    Ok(it.into_state())
}

/// `(L_gamma, G)` at `state`. The consensus term uses the pairwise form
/// `||theta||_V^2 = sum_{i<j} w_ij ||theta_i - theta_j||^2`.
pub fn evaluate_objective(state: &StackedState, shards: &AgentShards, w: &GossipMatrix, cfg: &SolverConfig) -> Result<(f64, f64)> {
    check_shapes(state, w, shards)?;
    let m = shards.m as f64;
    let total = shards.total_samples() as f64;
    let mut fit = 0.0;
    for (shard, theta) in shards.shards.iter().zip(&state.blocks) {
        let mut r = shard.y.clone();
        r.gemv(1.0, &shard.x, theta, -1.0);
        fit += r.norm_squared();
    }
    let mut disagreement = 0.0;
    for i in 0..shards.m {
        for &(j, wij) in w.row(i) {
            if j > i {
                disagreement += wij * (&state.blocks[i] - &state.blocks[j]).norm_squared();
            }
        }
    }
    let l_gamma = fit / (2.0 * total) + disagreement / (2.0 * m * cfg.gamma);
    let l1: f64 = state.blocks.iter().map(|b| b.lp_norm(1)).sum();
    Ok((l_gamma, l_gamma + cfg.lambda * l1 / m))
}

/// Error metrics of a state that do not involve the objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateMetrics {
    pub avg_est_err: Option<f64>,
    pub consensus_err: f64,
    pub mse_test: Option<f64>,
}

/// `mse_test = (1/(m N_test)) sum_i ||y_test - X_test theta_i||^2`.
pub fn metrics(state: &StackedState, truth: Option<&GroundTruth>, test: Option<&Dataset>) -> StateMetrics {
    let avg_est_err = truth.map(|t| state.avg_est_err(&t.vector()));
    let mse_test = test.map(|ds| {
        let total: f64 = state.blocks.iter().map(|b| (&ds.y - &ds.x * b).norm_squared()).sum();
        total / (state.agents() * ds.samples()) as f64
    });
    StateMetrics { avg_est_err, consensus_err: state.consensus_err(), mse_test }
}

/// Runs from `theta^0 = 0`.
pub fn run(
    shards: &AgentShards,
    w: &GossipMatrix,
    cfg: &SolverConfig,
    truth: Option<&GroundTruth>,
    test: Option<&Dataset>,
) -> Result<RunTrace> {
    run_with_init(shards, w, cfg, None, truth, test)
}

pub fn run_with_init(
    shards: &AgentShards,
    w: &GossipMatrix,
    cfg: &SolverConfig,
    init: Option<StackedState>,
    truth: Option<&GroundTruth>,
    test: Option<&Dataset>,
) -> Result<RunTrace> {
    if let Some(t) = truth {
        if t.dim() != shards.dim() {
            return Err(Error::dims("ground truth dimension differs from the data"));
        }
    }
    if let Some(ds) = test {
        if ds.dim() != shards.dim() {
            return Err(Error::dims("test set dimension differs from the data"));
        }
    }
    let start = Instant::now();
    let mut it = DgdIteration::new(shards, w, cfg, init)?;
    let record = |state: &StackedState| -> Result<IterationMetrics> {
        let (_, g) = evaluate_objective(state, shards, w, cfg)?;
        let sm = metrics(state, truth, test);
        Ok(IterationMetrics {
            iter: state.iteration,
            avg_est_err: sm.avg_est_err,
            consensus_err: sm.consensus_err,
            objective_g: g,
            objective_gap: 0.0,
            mse_test: sm.mse_test,
            elapsed_ms: cfg.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        })
    };
    let mut trace = vec![record(it.state())?];
    let mut stop = StopReason::MaxIters;
    for t in 1..=cfg.max_iters {
        let (change, norm) = it.step()?;
        let converged = cfg.rel_tol > 0.0 && change <= cfg.rel_tol * cfg.rel_tol * norm;
        if converged || t % cfg.metric_stride == 0 || t == cfg.max_iters {
            trace.push(record(it.state())?);
        }
        if converged {
            stop = StopReason::RelTol;
            break;
        }
    }
    trace::fill_gaps(&mut trace);
    Ok(RunTrace { config: cfg.clone(), metrics: trace, final_state: it.into_state(), stop })
}
