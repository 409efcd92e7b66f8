//! Proximal gradient (ISTA) on the pooled LASSO problem
//! `min (1/2N) ||y - X theta||^2 + lambda ||theta||_1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::symmetric_eigenvalues;
use crate::proxops::constrained_prox_in_place;

use super::kernels::least_squares_gradient;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IstaConfig {
    pub lambda: f64,
    pub beta: f64,
    pub max_iters: usize,
    /// Stop once `||theta^{t+1} - theta^t|| <= tol ||theta^t||`; 0 disables.
    pub tol: f64,
    /// Optional l1-ball constraint, applied exactly as in the distributed update.
    pub radius: Option<f64>,
    /// Reject `beta > N / lambda_max(X^T X)`.
    pub strict: bool,
}

impl IstaConfig {
    /// Stepsize `1/L` with `L = lambda_max(X^T X / N)`.
    pub fn for_design(x: &DMatrix<f64>, lambda: f64) -> Result<Self> {
        Ok(Self { lambda, beta: max_stepsize(x)?, max_iters: 100_000, tol: 1e-12, radius: None, strict: true })
    }
}

#[derive(Clone, Debug)]
pub struct IstaResult {
    pub theta: DVector<f64>,
    /// Objective at `theta^0, theta^1, ...`.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `N / lambda_max(X^T X)`, the largest stable ISTA stepsize.
pub fn max_stepsize(x: &DMatrix<f64>) -> Result<f64> {
    let gram = if x.nrows() <= x.ncols() { x * x.transpose() } else { x.tr_mul(x) };
    let top = symmetric_eigenvalues(&gram)?[0];
    if top <= 0.0 {
        return Err(Error::invalid("design matrix is zero"));
    }
    Ok(x.nrows() as f64 / top)
}

/// Smallest `lambda` for which `0` solves the LASSO: `||X^T y||_inf / N`.
pub fn zero_solution_lambda(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    x.tr_mul(y).amax() / x.nrows() as f64
}

pub fn lasso_objective(x: &DMatrix<f64>, y: &DVector<f64>, theta: &DVector<f64>, lambda: f64) -> f64 {
    (y - x * theta).norm_squared() / (2.0 * x.nrows() as f64) + lambda * theta.lp_norm(1)
}

/// One-step-at-a-time ISTA, for per-iterate comparisons.
pub struct IstaIteration<'a> {
    x: &'a DMatrix<f64>,
    xt: DMatrix<f64>,
    y: &'a DVector<f64>,
    lambda: f64,
    beta: f64,
    radius: f64,
    theta: DVector<f64>,
    grad: DVector<f64>,
    iteration: usize,
}

impl<'a> IstaIteration<'a> {
    pub fn new(x: &'a DMatrix<f64>, y: &'a DVector<f64>, cfg: &IstaConfig, init: Option<DVector<f64>>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::dims(format!("X has {} rows, y has {}", x.nrows(), y.len())));
        }
        if !(cfg.lambda >= 0.0) || !(cfg.beta > 0.0) {
            return Err(Error::invalid(format!("need lambda >= 0 and beta > 0, got {} and {}", cfg.lambda, cfg.beta)));
        }
        if let Some(r) = cfg.radius {
            if !(r > 0.0) {
                return Err(Error::invalid(format!("radius must be positive, got {r}")));
            }
        }
        if cfg.strict {
            let bound = max_stepsize(x)?;
            if cfg.beta > bound * (1.0 + 1e-12) {
                return Err(Error::Stepsize { beta: cfg.beta, bound });
            }
        }
        let theta = init.unwrap_or_else(|| DVector::zeros(x.ncols()));
        if theta.len() != x.ncols() {
            return Err(Error::dims("initial point has the wrong dimension"));
        }
        Ok(Self {
            x,
            xt: x.transpose(),
            y,
            lambda: cfg.lambda,
            beta: cfg.beta,
            radius: cfg.radius.unwrap_or(f64::INFINITY),
            theta,
            grad: DVector::zeros(x.ncols()),
            iteration: 0,
        })
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn objective(&self) -> f64 {
        lasso_objective(self.x, self.y, &self.theta, self.lambda)
    }

    /// Advances one step and returns `||theta^{t+1} - theta^t||^2`.
    pub fn step(&mut self) -> Result<f64> {
        least_squares_gradient(&self.xt, self.y.as_slice(), self.theta.as_slice(), self.grad.as_mut_slice());
        let mut next = DVector::zeros(self.theta.len());
        for ((p, t), g) in next.iter_mut().zip(self.theta.iter()).zip(self.grad.iter()) {
            *p = t - self.beta * g;
        }
        constrained_prox_in_place(next.as_mut_slice(), self.beta * self.lambda, self.radius);
        self.iteration += 1;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { iter: self.iteration, agent: 0 });
        }
        let change = (&next - &self.theta).norm_squared();
        self.theta = next;
        Ok(change)
    }
}

/// Runs ISTA from zero until `max_iters` or the relative-change tolerance.
pub fn centralized_ista(x: &DMatrix<f64>, y: &DVector<f64>, cfg: &IstaConfig) -> Result<IstaResult> {
    let mut it = IstaIteration::new(x, y, cfg, None)?;
    let mut objective = vec![it.objective()];
    let mut converged = false;
    while it.iteration() < cfg.max_iters {
        let prev_norm = it.theta().norm_squared();
        let change = it.step()?;
        objective.push(it.objective());
        if cfg.tol > 0.0 && change <= cfg.tol * cfg.tol * prev_norm {
            converged = true;
            break;
        }
    }
    Ok(IstaResult { iterations: it.iteration(), theta: it.theta, objective, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_design_closed_form() {
        let x = DMatrix::identity(2, 2);
        let y = DVector::from_vec(vec![1.0, 0.2]);
        let cfg = IstaConfig { lambda: 0.1, beta: 1.0, max_iters: 1000, tol: 1e-14, radius: None, strict: true };
        let res = centralized_ista(&x, &y, &cfg).unwrap();
        // soft(y_j, N lambda) with N = 2
        assert!((res.theta[0] - 0.8).abs() < 1e-12);
        assert_eq!(res.theta[1], 0.0);
    }

    #[test]
    fn least_squares_without_penalty() {
        let x = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.5, 0.3, 0.0, 0.3, 1.0]);
        let y = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let mut cfg = IstaConfig::for_design(&x, 0.0).unwrap();
        cfg.tol = 0.0;
        cfg.max_iters = 20_000;
        let res = centralized_ista(&x, &y, &cfg).unwrap();
        let exact = x.clone().lu().solve(&y).unwrap();
        assert!((res.theta - exact).amax() < 1e-8);
        assert!(res.objective.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn large_lambda_gives_zero() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.2, -0.4, 1.0, 0.3, 0.3]);
        let y = DVector::from_vec(vec![0.5, 1.0, -0.2]);
        let lam = zero_solution_lambda(&x, &y);
        let res = centralized_ista(&x, &y, &IstaConfig::for_design(&x, lam * 1.0001).unwrap()).unwrap();
        assert_eq!(res.theta, DVector::zeros(2));
    }

    #[test]
    fn strict_mode_rejects_long_steps() {
        let x = DMatrix::identity(2, 2);
        let y = DVector::zeros(2);
        let cfg = IstaConfig { lambda: 0.1, beta: 3.0, max_iters: 5, tol: 0.0, radius: None, strict: true };
        assert!(matches!(centralized_ista(&x, &y, &cfg), Err(Error::Stepsize { .. })));
    }
}
