//! Parameter-selection rules, error and iteration bounds, and verifiable
//! structural conditions, all evaluated numerically.
//!
//! Logarithms are natural. Universal constants `c1..c26` live in
//! [`Constants`] and default to 1.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::datagen::{AgentShards, CovarianceSummary, GroundTruth};
use crate::error::{Error, Result};
use crate::rng;
use crate::solver::StackedState;

/// Named universal constants. Unset names read as 1.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Constants(BTreeMap<String, f64>);

impl Constants {
    pub fn get(&self, name: &str) -> f64 {
        self.0.get(name).copied().unwrap_or(1.0)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let idx: Option<u32> = name.strip_prefix('c').and_then(|k| k.parse().ok());
        if !matches!(idx, Some(0..=26)) {
            return Err(Error::invalid(format!("unknown constant {name:?}; expected c0..c26")));
        }
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::invalid(format!("constant {name} must be positive, got {value}")));
        }
        self.0.insert(name.to_string(), value);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let mut copy = Constants::default();
        for (k, v) in &self.0 {
            copy.set(k, *v)?;
        }
        Ok(())
    }

    /// All 27 constants including defaults, for reports.
    pub fn resolved(&self) -> BTreeMap<String, f64> {
        (0..=26).map(|k| format!("c{k}")).map(|k| (k.clone(), self.get(&k))).collect()
    }
}

/// Restricted strong convexity parameters:
/// `||X D||^2 / N >= (mu/2) ||D||^2 - (tau/2) ||D||_1^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RscParams {
    pub mu: f64,
    pub tau: f64,
}

impl RscParams {
    pub fn new(mu: f64, tau: f64) -> Result<Self> {
        if !(mu > 0.0) || !(tau >= 0.0) {
            return Err(Error::invalid(format!("need mu > 0 and tau >= 0, got mu={mu}, tau={tau}")));
        }
        Ok(Self { mu, tau })
    }

    /// Gaussian-design values `mu = lambda_min(Sigma)`, `tau = 2 c1 zeta ln d / N`.
    pub fn gaussian_design(cov: &CovarianceSummary, n_total: usize, d: usize, constants: &Constants) -> Result<Self> {
        Self::new(cov.lambda_min, 2.0 * constants.get("c1") * cov.zeta * (d as f64).ln() / n_total as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryInputs {
    pub rho: f64,
    pub m: usize,
    /// Samples per agent.
    pub n: usize,
    /// Total samples `N = m n`.
    pub n_total: usize,
    pub d: usize,
    pub s: usize,
    pub sigma: f64,
    pub zeta_sigma: f64,
    pub lambda_min_cov: f64,
    pub lambda_max_cov: f64,
    pub l_max: f64,
    pub lambda_min_w: f64,
    pub t0: f64,
    pub constants: Constants,
}

impl TheoryInputs {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::Regime(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        if self.m == 0 || self.n == 0 || self.d == 0 || self.s == 0 || self.n_total != self.m * self.n {
            return Err(Error::invalid(format!(
                "dimensions must be positive with N = m n (m={}, n={}, N={}, d={}, s={})",
                self.m, self.n, self.n_total, self.d, self.s
            )));
        }
        if !(self.t0 >= 2.0) {
            return Err(Error::invalid(format!("t0 must be at least 2, got {}", self.t0)));
        }
        if !(self.lambda_min_cov > 0.0 && self.lambda_max_cov >= self.lambda_min_cov && self.zeta_sigma > 0.0) {
            return Err(Error::invalid("covariance summary must be positive definite"));
        }
        self.constants.validate()
    }

    pub fn covariance(&self) -> CovarianceSummary {
        CovarianceSummary { zeta: self.zeta_sigma, lambda_min: self.lambda_min_cov, lambda_max: self.lambda_max_cov }
    }

    pub fn rsc(&self) -> Result<RscParams> {
        RscParams::gaussian_design(&self.covariance(), self.n_total, self.d, &self.constants)
    }
}

/// `lambda = c4 sigma sqrt(zeta t0 ln d / N)`.
pub fn choose_lambda(inp: &TheoryInputs) -> Result<f64> {
    if !(inp.t0 >= 2.0) {
        return Err(Error::invalid(format!("t0 must be at least 2, got {}", inp.t0)));
    }
    if inp.d < 2 || inp.n_total == 0 {
        return Err(Error::invalid("need d >= 2 and N >= 1"));
    }
    let c4 = inp.constants.get("c4");
    Ok(c4 * inp.sigma * (inp.zeta_sigma * inp.t0 * (inp.d as f64).ln() / inp.n_total as f64).sqrt())
}

/// `gamma = c5 (1 - rho) / (lambda_max(Sigma)(d + ln m) + lambda_min(Sigma) d m (ln m + 1))`.
pub fn choose_gamma(inp: &TheoryInputs) -> Result<f64> {
    if !(inp.rho < 1.0) {
        return Err(Error::Regime(format!("rho must be below 1, got {}", inp.rho)));
    }
    let (d, m) = (inp.d as f64, inp.m as f64);
    let denom = inp.lambda_max_cov * (d + m.ln()) + inp.lambda_min_cov * d * m * (m.ln() + 1.0);
    Ok(inp.constants.get("c5") * (1.0 - inp.rho) / denom)
}

/// `beta = gamma / (gamma L_max + 1 - lambda_min(W))`.
pub fn choose_beta(gamma: f64, l_max: f64, lambda_min_w: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
    }
    Ok(crate::solver::stepsize_bound(gamma, l_max, lambda_min_w))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusInterval {
    pub lower: f64,
    pub upper: f64,
}

impl RadiusInterval {
    pub fn is_empty(&self) -> bool {
        self.lower > self.upper
    }
}

/// `max{56 lambda s / (mu - 32 s tau), 2 ||theta*||_1} <= R <= lambda / (32 tau)`.
pub fn radius_bounds(lambda: f64, s: usize, rsc: RscParams, l1_truth: f64) -> Result<RadiusInterval> {
    let s = s as f64;
    let margin = rsc.mu - 32.0 * s * rsc.tau;
    if !(margin > 0.0) {
        return Err(Error::Regime(format!("mu - 32 s tau = {margin:e} must be positive")));
    }
    let lower = (56.0 * lambda * s / margin).max(2.0 * l1_truth);
    let upper = if rsc.tau == 0.0 { f64::INFINITY } else { lambda / (32.0 * rsc.tau) };
    Ok(RadiusInterval { lower, upper })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateQuantities {
    /// `mu/8 - 8 s tau`
    pub mu_av: f64,
    /// `1 - beta mu_av / 4`
    pub kappa: f64,
    /// `1 - beta mu_av`, the same contraction without the factor 1/4.
    pub kappa_full_step: f64,
    /// `36 avg_err_hat + lambda^2 s / (1976 mu^2)`
    pub eps_stat_sq: f64,
    /// `d gamma / (lambda (1 - rho)) (max_i ||w_i^T X_i||_inf / n + lambda)^2`
    pub h_max: f64,
}

/// Quantities entering the linear-rate statement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    pub beta: f64,
    pub lambda: f64,
    pub gamma: f64,
    /// `(1/m) sum_i ||theta_hat_i - theta*||^2`
    pub avg_err_hat: f64,
    /// `max_i ||w_i^T X_i||_inf`
    pub noise_corr_max: f64,
}

pub fn rate_quantities(inp: &TheoryInputs, rsc: RscParams, r: &RateInputs) -> Result<RateQuantities> {
    let s = inp.s as f64;
    let mu_av = rsc.mu / 8.0 - 8.0 * s * rsc.tau;
    if !(mu_av > 0.0) {
        return Err(Error::Regime(format!("mu/8 - 8 s tau = {mu_av:e} must be positive")));
    }
    let kappa = 1.0 - r.beta * mu_av / 4.0;
    let kappa_full_step = 1.0 - r.beta * (rsc.mu / 8.0 - 8.0 * rsc.tau * s);
    let eps_stat_sq = 36.0 * r.avg_err_hat + r.lambda * r.lambda * s / (1976.0 * rsc.mu * rsc.mu);
    let h_max = h_max(inp.d, r.gamma, r.lambda, inp.rho, r.noise_corr_max, inp.n);
    Ok(RateQuantities { mu_av, kappa, kappa_full_step, eps_stat_sq, h_max })
}

pub fn h_max(d: usize, gamma: f64, lambda: f64, rho: f64, noise_corr_max: f64, n: usize) -> f64 {
    let inner = noise_corr_max / n as f64 + lambda;
    d as f64 * gamma / (lambda * (1.0 - rho)) * inner * inner
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationBound {
    /// Rounds after which the optimization error is below `alpha^2`.
    pub rounds: f64,
    /// `ceil(log2 log2(R lambda / alpha^2))` term alone.
    pub epoch_term: f64,
    /// `(L_max/mu_av + (1 + rho)/(gamma mu_av)) ln(eta0 / alpha^2)` term alone.
    pub tail_term: f64,
    /// `c26 kappa_Sigma d m (ln m + 1) / (1 - rho)`
    pub order_estimate: f64,
}

/// Evaluates
/// `ceil(log2 log2(R lambda/alpha^2)) (1 + L_max ln2/mu_av + (1+rho) ln2/(gamma mu_av))
///  + (L_max/mu_av + (1+rho)/(gamma mu_av)) ln(eta0/alpha^2)`.
pub fn iteration_bound(
    inp: &TheoryInputs,
    eta0: f64,
    alpha_sq: f64,
    radius: f64,
    lambda: f64,
    rate: &RateQuantities,
    gamma: f64,
) -> Result<IterationBound> {
    let cap = (radius * lambda / 4.0).min(eta0);
    if !(alpha_sq > 0.0 && alpha_sq <= cap) {
        return Err(Error::invalid(format!("alpha^2 = {alpha_sq:e} must lie in (0, min(R lambda/4, eta0) = {cap:e}]")));
    }
    let (rho, l_max, mu_av) = (inp.rho, inp.l_max, rate.mu_av);
    let ln2 = std::f64::consts::LN_2;
    let epochs = (radius * lambda / alpha_sq).log2().log2().ceil();
    let epoch_term = epochs * (1.0 + l_max * ln2 / mu_av + (1.0 + rho) * ln2 / (gamma * mu_av));
    let tail_term = (l_max / mu_av + (1.0 + rho) / (gamma * mu_av)) * (eta0 / alpha_sq).ln();
    let (d, m) = (inp.d as f64, inp.m as f64);
    let kappa_sigma = inp.lambda_max_cov / inp.lambda_min_cov;
    let order_estimate = inp.constants.get("c26") * kappa_sigma * d * m * (m.ln() + 1.0) / (1.0 - rho);
    Ok(IterationBound { rounds: epoch_term + tail_term, epoch_term, tail_term, order_estimate })
}

fn unit(v: DVector<f64>) -> Option<DVector<f64>> {
    let n = v.norm();
    (n > 0.0).then(|| v / n)
}

/// Falsification search for the RSC inequality. Samples `num_dirs` unit
/// directions per family (dense Gaussian, sparse Gaussian, random signs) and
/// returns the smallest `||X D||^2/N - (mu/2)||D||^2 + (tau/2)||D||_1^2`.
pub fn rsc_check(x: &DMatrix<f64>, rsc: RscParams, num_dirs: usize, seed: u64) -> Result<f64> {
    if num_dirs == 0 {
        return Err(Error::invalid("num_dirs must be at least 1"));
    }
    let (n_total, d) = (x.nrows() as f64, x.ncols());
    let slack = |v: &DVector<f64>| -> f64 {
        (x * v).norm_squared() / n_total - 0.5 * rsc.mu * v.norm_squared() + 0.5 * rsc.tau * v.lp_norm(1).powi(2)
    };
    let mut rng = rng::substream(seed, rng::tags::RSC);
    let mut worst = f64::INFINITY;
    for _ in 0..num_dirs {
        let dense = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let k = rng.random_range(1..=d.min(10));
        let mut sparse = DVector::zeros(d);
        for j in sample(&mut rng, d, k) {
            sparse[j] = rng.sample(StandardNormal);
        }
        let signs = DVector::from_fn(d, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 });
        for v in [dense, sparse, signs].into_iter().filter_map(unit) {
            worst = worst.min(slack(&v));
        }
    }
    Ok(worst)
}

/// `h(gamma, ||D_perp||) = -(1-rho)/(m gamma lambda) ||D_perp||^2
///   + (2 max_i ||w_i^T X_i||_inf / (lambda n) + 2) sqrt(d/m) ||D_perp||`.
pub fn cone_slack_h(perp_norm: f64, m: usize, d: usize, n: usize, gamma: f64, lambda: f64, rho: f64, noise_corr_max: f64) -> f64 {
    let m_f = m as f64;
    -(1.0 - rho) / (m_f * gamma * lambda) * perp_norm * perp_norm
        + (2.0 * noise_corr_max / (lambda * n as f64) + 2.0) * (d as f64 / m_f).sqrt() * perp_norm
}

/// Residual `3 ||(D_av)_S||_1 + h - ||(D_av)_{S^c}||_1` of the cone
/// condition for `delta = theta - 1 ⊗ theta*`; nonnegative means inside.
pub fn cone_membership(
    delta: &StackedState,
    truth: &GroundTruth,
    gamma: f64,
    lambda: f64,
    shards: &AgentShards,
    rho: f64,
) -> Result<f64> {
    if delta.dim() != truth.dim() || delta.agents() != shards.m {
        return Err(Error::dims("error state does not match the data"));
    }
    let noise_corr_max = shards.noise_correlation_max()?;
    let avg = delta.average();
    let perp_norm = delta.orthogonal().iter().map(|b| b.norm_squared()).sum::<f64>().sqrt();
    let (mut on, mut off) = (0.0, 0.0);
    for (j, v) in avg.iter().enumerate() {
        if truth.in_support(j) {
            on += v.abs();
        } else {
            off += v.abs();
        }
    }
    let h = cone_slack_h(perp_norm, shards.m, truth.dim(), shards.n, gamma, lambda, rho, noise_corr_max);
    Ok(3.0 * on + h - off)
}

/// Smallest `lambda` allowed by the noise condition `2 ||X^T w||_inf / N <= lambda`.
pub fn lambda_noise_floor(shards: &AgentShards) -> Result<f64> {
    let mut total: Option<DVector<f64>> = None;
    for (i, shard) in shards.shards.iter().enumerate() {
        let w = shard.noise.as_ref().ok_or_else(|| Error::MissingNoise(format!("shard {i} has no noise record")))?;
        let c = shard.x.tr_mul(w);
        total = Some(match total {
            Some(t) => t + c,
            None => c,
        });
    }
    Ok(2.0 * total.map_or(0.0, |t| t.amax()) / shards.total_samples() as f64)
}

/// Terms of the error bound on `(1/m) sum_i ||theta_hat_i - theta*||^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound {
    pub centralized: f64,
    pub decentralization: f64,
    pub total: f64,
    /// `mu/2 - 16 s tau`
    pub delta: f64,
}

/// Evaluates
/// `9 lambda^2 s/delta^2
///  + 2 xi d^2 gamma^2 (M + lambda n)^4 / (delta lambda^2 n^4 (1-rho)^2)
///  + 4 d gamma (M + lambda n)^2 / (delta n^2 [2(1-rho) - 4 L_max gamma - delta gamma])`
/// with `delta = mu/2 - 16 s tau`, `xi = tau`, `M = max_i ||w_i^T X_i||_inf`.
pub fn error_bound_eval(inp: &TheoryInputs, rsc: RscParams, lambda: f64, gamma: f64, noise_corr_max: f64) -> Result<ErrorBound> {
    let s = inp.s as f64;
    let delta = rsc.mu / 2.0 - 16.0 * s * rsc.tau;
    if !(delta > 0.0) {
        return Err(Error::Regime(format!("mu/2 - 16 s tau = {delta:e} must be positive")));
    }
    let gamma_cap = 2.0 * (1.0 - inp.rho) / (4.0 * inp.l_max + delta);
    if !(gamma > 0.0 && gamma <= gamma_cap) {
        return Err(Error::Regime(format!("gamma = {gamma:e} exceeds 2(1-rho)/(4 L_max + delta) = {gamma_cap:e}")));
    }
    let (d, n, rho, xi) = (inp.d as f64, inp.n as f64, inp.rho, rsc.tau);
    let a = noise_corr_max + lambda * n;
    let centralized = 9.0 * lambda * lambda * s / (delta * delta);
    let second = 2.0 * xi * d * d * gamma * gamma * a.powi(4) / (delta * lambda * lambda * n.powi(4) * (1.0 - rho).powi(2));
    let third = 4.0 * d * gamma * a * a / (delta * n * n * (2.0 * (1.0 - rho) - 4.0 * inp.l_max * gamma - delta * gamma));
    let decentralization = second + third;
    Ok(ErrorBound { centralized, decentralization, total: centralized + decentralization, delta })
}

/// One entry of the diagnostics report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaEntry {
    pub inputs: Value,
    /// `null` when the formula's preconditions fail.
    pub output: Value,
    pub formula: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Flat report keyed by formula name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiagnosticsReport(pub BTreeMap<String, FormulaEntry>);

impl DiagnosticsReport {
    pub fn insert<T: Serialize>(&mut self, name: &str, formula: &str, inputs: Value, output: &Result<T>) {
        let (output, error) = match output {
            Ok(v) => (serde_json::to_value(v).unwrap_or(Value::Null), None),
            Err(e) => (Value::Null, Some(e.to_string())),
        };
        self.0.insert(name.to_string(), FormulaEntry { inputs, output, formula: formula.to_string(), error });
    }

    pub fn get(&self, name: &str) -> Option<&FormulaEntry> {
        self.0.get(name)
    }
}

/// Measured quantities of a solved synthetic instance fed into the report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvedInstance {
    pub lambda: f64,
    pub gamma: f64,
    pub beta: f64,
    pub radius: f64,
    pub avg_err: f64,
    pub noise_corr_max: f64,
    pub cone_residual: f64,
    /// `G(theta^0) - G(theta_hat)`
    pub eta0: f64,
}

/// Evaluates every rule and bound for `inp` and, when given, a solved instance.
pub fn diagnostics(inp: &TheoryInputs, solved: Option<&SolvedInstance>, l1_truth: Option<f64>, rsc_slack: Option<f64>) -> DiagnosticsReport {
    let mut rep = DiagnosticsReport::default();
    let base = serde_json::to_value(inp).unwrap_or(Value::Null);
    let rsc = inp.rsc();
    rep.insert("rsc_params", "mu = lambda_min(Sigma), tau = 2 c1 zeta ln d / N", base.clone(), &rsc);
    let lambda_rule = choose_lambda(inp);
    rep.insert("choose_lambda", "c4 sigma sqrt(zeta t0 ln d / N)", base.clone(), &lambda_rule);
    let gamma_rule = choose_gamma(inp);
    rep.insert(
        "choose_gamma",
        "c5 (1-rho) / (lambda_max(Sigma)(d + ln m) + lambda_min(Sigma) d m (ln m + 1))",
        base.clone(),
        &gamma_rule,
    );
    let lambda = solved.map(|s| s.lambda).or(lambda_rule.as_ref().ok().copied());
    let gamma = solved.map(|s| s.gamma).or(gamma_rule.as_ref().ok().copied());
    if let Some(g) = gamma {
        rep.insert(
            "choose_beta",
            "gamma / (gamma L_max + 1 - lambda_min(W))",
            json!({"gamma": g, "l_max": inp.l_max, "lambda_min_w": inp.lambda_min_w}),
            &choose_beta(g, inp.l_max, inp.lambda_min_w),
        );
    }
    if let (Ok(rsc), Some(lam)) = (&rsc, lambda) {
        let l1 = l1_truth.unwrap_or(0.0);
        rep.insert(
            "radius_bounds",
            "max(56 lambda s / (mu - 32 s tau), 2 ||theta*||_1) <= R <= lambda / (32 tau)",
            json!({"lambda": lam, "s": inp.s, "mu": rsc.mu, "tau": rsc.tau, "l1_truth": l1}),
            &radius_bounds(lam, inp.s, *rsc, l1).map(|r| json!({"lower": r.lower, "upper": r.upper, "empty": r.is_empty()})),
        );
    }
    if let Some(slack) = rsc_slack {
        rep.insert("rsc_check", "min over sampled D of ||X D||^2/N - (mu/2)||D||^2 + (tau/2)||D||_1^2", base.clone(), &Ok(slack));
    }
    let (Ok(rsc), Some(sol)) = (rsc, solved) else {
        return rep;
    };
    let rate_in = RateInputs {
        beta: sol.beta,
        lambda: sol.lambda,
        gamma: sol.gamma,
        avg_err_hat: sol.avg_err,
        noise_corr_max: sol.noise_corr_max,
    };
    let rate = rate_quantities(inp, rsc, &rate_in);
    rep.insert(
        "rate_quantities",
        "mu_av = mu/8 - 8 s tau; kappa = 1 - beta mu_av/4; eps_stat^2 = 36 err + lambda^2 s/(1976 mu^2); h_max",
        serde_json::to_value(rate_in).unwrap_or(Value::Null),
        &rate,
    );
    if let Ok(rate) = &rate {
        let alpha_sq = (sol.radius * sol.lambda / 4.0).min(sol.eta0) * 1e-6;
        rep.insert(
            "iteration_bound",
            "ceil(log2 log2(R lambda/alpha^2))(1 + L_max ln2/mu_av + (1+rho) ln2/(gamma mu_av)) + (L_max/mu_av + (1+rho)/(gamma mu_av)) ln(eta0/alpha^2)",
            json!({"eta0": sol.eta0, "alpha_sq": alpha_sq, "radius": sol.radius, "lambda": sol.lambda, "gamma": sol.gamma}),
            &iteration_bound(inp, sol.eta0, alpha_sq, sol.radius, sol.lambda, rate, sol.gamma),
        );
    }
    let bound = error_bound_eval(inp, rsc, sol.lambda, sol.gamma, sol.noise_corr_max);
    rep.insert(
        "error_bound",
        "9 lambda^2 s/delta^2 + 2 xi d^2 gamma^2 (M + lambda n)^4/(delta lambda^2 n^4 (1-rho)^2) + 4 d gamma (M + lambda n)^2/(delta n^2 [2(1-rho) - 4 L_max gamma - delta gamma])",
        json!({"lambda": sol.lambda, "gamma": sol.gamma, "noise_corr_max": sol.noise_corr_max, "measured_avg_err": sol.avg_err}),
        &bound.map(|b| json!({"centralized": b.centralized, "decentralization": b.decentralization, "total": b.total, "delta": b.delta, "holds": sol.avg_err <= b.total})),
    );
    rep.insert(
        "cone_membership",
        "3 ||(D_av)_S||_1 + h(gamma, ||D_perp||) - ||(D_av)_{S^c}||_1",
        json!({"lambda": sol.lambda, "gamma": sol.gamma, "rho": inp.rho}),
        &Ok(sol.cone_residual),
    );
    rep
}
