use nalgebra::DVector;

use super::spec::{ExperimentSpec, Init};
use crate::datagen::{self, AgentShards, CovarianceSummary, Dataset, GroundTruth};
use crate::error::Result;
use crate::graph::{build_topology, GossipMatrix, Graph};
use crate::rng::{derive_seed, tags};
use crate::solver::{self, centralized_ista, IstaConfig, IstaResult, RunTrace, SolverConfig, StackedState};
use crate::theory::{self, RscParams, TheoryInputs};

/// One realization of data, network and shards.
#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub truth: Option<GroundTruth>,
    pub train: Dataset,
    pub test: Option<Dataset>,
    pub shards: AgentShards,
    pub graph: Graph,
    pub w: GossipMatrix,
    /// Population covariance for synthetic data, sample covariance otherwise.
    pub cov: CovarianceSummary,
    pub s: usize,
}

impl Instance {
    pub fn build(spec: &ExperimentSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let m = spec.network.m;
        let (truth, train, test, cov, s) = match &spec.data.csv {
            Some(path) => {
                let full = datagen::load_csv(path)?;
                let (train, test) = if spec.data.n_test > 0 {
                    let (a, b) = datagen::train_test_split(&full, spec.data.n_test, derive_seed(seed, tags::SPLIT))?;
                    (a, Some(b))
                } else {
                    (full, None)
                };
                let gram = train.x.tr_mul(&train.x) / train.samples() as f64;
                let cov = CovarianceSummary::of(&gram)?;
                let s = spec.data.s.unwrap_or_else(|| datagen::default_sparsity(train.dim()));
                (None, train, test, cov, s)
            }
            None => {
                let d = &spec.data;
                let s = spec.sparsity();
                let (truth, train) = datagen::synthetic_problem(d.n_total, d.d, s, d.sigma, d.phi, seed)?;
                let test = if d.n_test > 0 {
                    let ts = derive_seed(seed, tags::SPLIT);
                    let x = datagen::gen_ar_design(d.n_test, d.d, d.phi, derive_seed(ts, tags::DESIGN))?;
                    Some(datagen::gen_observations(x, &truth, d.sigma, derive_seed(ts, tags::NOISE))?)
                } else {
                    None
                };
                (Some(truth), train, test, CovarianceSummary::ar1(d.d, d.phi)?, s)
            }
        };
        let shards = datagen::partition(&train, m)?;
        let graph = build_topology(spec.network.topology, m, derive_seed(seed, tags::GRAPH))?;
        let w = spec.network.weights.apply(&graph)?;
        Ok(Self { seed, truth, train, test, shards, graph, w, cov, s })
    }

    pub fn theory_inputs(&self, spec: &ExperimentSpec) -> Result<TheoryInputs> {
        let inp = TheoryInputs {
            rho: self.w.rho(),
            m: self.shards.m,
            n: self.shards.n,
            n_total: self.shards.total_samples(),
            d: self.shards.dim(),
            s: self.s,
            sigma: spec.data.sigma,
            zeta_sigma: self.cov.zeta,
            lambda_min_cov: self.cov.lambda_min,
            lambda_max_cov: self.cov.lambda_max,
            l_max: self.shards.l_max()?,
            lambda_min_w: self.w.lambda_min(),
            t0: spec.solver.t0,
            constants: spec.solver.constants.clone(),
        };
        inp.validate()?;
        Ok(inp)
    }

    pub fn rsc(&self, spec: &ExperimentSpec) -> Result<RscParams> {
        RscParams::gaussian_design(&self.cov, self.shards.total_samples(), self.shards.dim(), &spec.solver.constants)
    }

    /// Pooled ISTA at `lambda`, run to a tight tolerance.
    pub fn centralized(&self, lambda: f64) -> Result<IstaResult> {
        let mut cfg = IstaConfig::for_design(&self.train.x, lambda)?;
        cfg.tol = 1e-10;
        cfg.max_iters = 500_000;
        centralized_ista(&self.train.x, &self.train.y, &cfg)
    }

    /// `||theta - theta*||^2` when the truth is known.
    pub fn error_of(&self, theta: &DVector<f64>) -> Option<f64> {
        self.truth.as_ref().map(|t| (theta - t.vector()).norm_squared())
    }

    /// The user's lambda, or the selection rule.
    pub fn resolve_lambda(&self, spec: &ExperimentSpec) -> Result<f64> {
        match spec.solver.lambda {
            Some(v) => Ok(v),
            None => theory::choose_lambda(&self.theory_inputs(spec)?),
        }
    }

    /// Solver configuration with every absent parameter filled by its rule.
    pub fn resolve(&self, spec: &ExperimentSpec) -> Result<SolverConfig> {
        let sp = &spec.solver;
        let inputs = || self.theory_inputs(spec);
        let mut prov = std::collections::BTreeMap::new();
        let lambda = match sp.lambda {
            Some(v) => {
                prov.insert("lambda".into(), "user".into());
                v
            }
            None => {
                prov.insert("lambda".into(), "choose_lambda: c4 sigma sqrt(zeta t0 ln d / N)".into());
                theory::choose_lambda(&inputs()?)?
            }
        };
        let gamma = match sp.gamma {
            Some(v) => {
                prov.insert("gamma".into(), "user".into());
                v
            }
            None => {
                prov.insert("gamma".into(), "choose_gamma".into());
                theory::choose_gamma(&inputs()?)?
            }
        };
        let beta = match sp.beta {
            Some(v) => {
                prov.insert("beta".into(), "user".into());
                v
            }
            None => {
                prov.insert("beta".into(), "choose_beta: gamma / (gamma L_max + 1 - lambda_min(W))".into());
                theory::choose_beta(gamma, self.shards.l_max()?, self.w.lambda_min())?
            }
        };
        let mut cfg = SolverConfig::new(lambda, gamma, beta, f64::INFINITY, sp.max_iters);
        cfg.rel_tol = if sp.rel_tol_per_beta > 0.0 { sp.rel_tol_per_beta * beta } else { sp.rel_tol };
        cfg.metric_stride = sp.stride;
        cfg.seed = self.seed;
        cfg.strict = sp.strict;
        cfg.record_timing = sp.record_timing;
        cfg.radius = match sp.radius {
            Some(r) => {
                prov.insert("radius".into(), "user".into());
                r
            }
            None => match &self.truth {
                Some(truth) => {
                    let twice = 2.0 * truth.l1_norm;
                    match self.rsc(spec).and_then(|rsc| theory::radius_bounds(lambda, self.s, rsc, truth.l1_norm)) {
                        Ok(iv) => {
                            prov.insert("radius".into(), "radius_bounds lower end".into());
                            iv.lower.max(twice)
                        }
                        Err(e) => {
                            prov.insert("radius".into(), format!("2 ||theta*||_1 (lower bound unavailable: {e})"));
                            twice
                        }
                    }
                }
                None => {
                    prov.insert("radius".into(), "max_i ||theta_i||_1 of an unconstrained warm run".into());
                    let mut warm_cfg = cfg.clone();
                    warm_cfg.metric_stride = cfg.max_iters.max(1);
                    let warm = solver::run(&self.shards, &self.w, &warm_cfg, None, None)?;
                    let r = warm.final_state.max_l1();
                    if r > 0.0 {
                        r
                    } else {
                        f64::INFINITY
                    }
                }
            },
        };
        prov.insert("init".into(), format!("{:?}", sp.init).to_lowercase());
        cfg.provenance = prov;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Initial stacked state per `init`; the centralized start reuses `central` when given.
    pub fn initial_state(&self, init: Init, lambda: f64, central: Option<&IstaResult>) -> Result<Option<StackedState>> {
        Ok(match init {
            Init::Zero => None,
            Init::Centralized => {
                let theta = match central {
                    Some(c) => c.theta.clone(),
                    None => self.centralized(lambda)?.theta,
                };
                Some(StackedState::consensual(self.shards.m, &theta))
            }
        })
    }

    pub fn run(&self, cfg: &SolverConfig, init: Option<StackedState>) -> Result<RunTrace> {
        solver::run_with_init(&self.shards, &self.w, cfg, init, self.truth.as_ref(), self.test.as_ref())
    }

    /// Average error of agents that each solve the LASSO on their own shard
    /// with `lambda_local`.
    pub fn local_reference(&self, lambda_local: f64) -> Result<LocalReference> {
        let mut err = 0.0;
        let mut mse = 0.0;
        for shard in &self.shards.shards {
            let mut cfg = IstaConfig::for_design(&shard.x, lambda_local)?;
            cfg.tol = 1e-10;
            cfg.max_iters = 500_000;
            let theta = centralized_ista(&shard.x, &shard.y, &cfg)?.theta;
            if let Some(e) = self.error_of(&theta) {
                err += e;
            }
            if let Some(t) = &self.test {
                mse += (&t.y - &t.x * &theta).norm_squared() / t.samples() as f64;
            }
        }
        let m = self.shards.m as f64;
        Ok(LocalReference {
            avg_est_err: self.truth.as_ref().map(|_| err / m),
            mse_test: self.test.as_ref().map(|_| mse / m),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalReference {
    pub avg_est_err: Option<f64>,
    pub mse_test: Option<f64>,
}

/// Seed of Monte-Carlo repetition `rep`.
pub fn rep_seed(seed: u64, rep: usize) -> u64 {
    derive_seed(derive_seed(seed, tags::REP), rep as u64)
}

/// Independent sub-seed for Monte-Carlo checks outside the data pipeline.
pub fn rsc_seed(seed: u64) -> u64 {
    derive_seed(seed, tags::RSC)
}
