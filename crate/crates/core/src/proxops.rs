//! Soft-thresholding, Euclidean projection onto the l1 ball, and the
//! composite per-agent update that combines them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold `beta * lambda` and radius `R` of one proximal update.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxParams {
    pub threshold: f64,
    pub radius: f64,
}

impl ProxParams {
    pub fn new(threshold: f64, radius: f64) -> Result<Self> {
        check_threshold(threshold)?;
        check_radius(radius)?;
        Ok(Self { threshold, radius })
    }

    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        let mut out = psi.to_vec();
        constrained_prox_in_place(&mut out, self.threshold, self.radius);
        out
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("threshold must be finite and nonnegative, got {t}")))
    }
}

fn check_radius(r: f64) -> Result<()> {
    // +inf is allowed and means "no constraint".
    if r > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("radius must be positive, got {r}")))
    }
}

#[inline]
fn shrink(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// `sign(v_j) * max(|v_j| - t, 0)`.
pub fn soft_threshold(v: &[f64], t: f64) -> Result<Vec<f64>> {
    check_threshold(t)?;
    Ok(v.iter().map(|&x| shrink(x, t)).collect())
}

pub fn soft_threshold_in_place(v: &mut [f64], t: f64) {
    for x in v.iter_mut() {
        *x = shrink(*x, t);
    }
}

/// Threshold `tau >= 0` with `sum_j max(|v_j| - tau, 0) = R`, from sorted
/// prefix sums. Only meaningful when `||v||_1 > R`.
pub fn l1_ball_threshold(v: &[f64], r: f64) -> f64 {
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut tau = 0.0;
    for (k, &u) in mags.iter().enumerate() {
        prefix += u;
        let candidate = (prefix - r) / (k + 1) as f64;
        if u > candidate {
            tau = candidate;
        } else {
            break;
        }
    }
    tau.max(0.0)
}

/// Euclidean projection onto `{x : ||x||_1 <= R}`.
pub fn project_l1_ball(v: &[f64], r: f64) -> Result<Vec<f64>> {
    check_radius(r)?;
    let mut out = v.to_vec();
    project_l1_ball_in_place(&mut out, r);
    Ok(out)
}

pub fn project_l1_ball_in_place(v: &mut [f64], r: f64) {
    if l1_norm(v) <= r {
        return;
    }
    let mut tau = l1_ball_threshold(v, r);
    // Rounding can leave the result a few ulps outside the ball; nudge tau
    // until it is inside so that projecting again is the identity.
    let mass = |tau: f64| -> f64 { v.iter().map(|&x| shrink(x, tau).abs()).sum() };
    for _ in 0..64 {
        if mass(tau) <= r {
            break;
        }
        tau = tau.next_up();
    }
    soft_threshold_in_place(v, tau);
}

/// Minimizer of `0.5 ||theta - psi||^2 + t ||theta||_1` over `||theta||_1 <= R`.
pub fn constrained_prox(psi: &[f64], beta_lambda: f64, r: f64) -> Result<Vec<f64>> {
    Ok(ProxParams::new(beta_lambda, r)?.apply(psi))
}

/// In-place form of [`constrained_prox`]; parameters are not validated.
pub fn constrained_prox_in_place(psi: &mut [f64], beta_lambda: f64, r: f64) {
    let shrunk: f64 = psi.iter().map(|&x| shrink(x, beta_lambda).abs()).sum();
    if shrunk <= r {
        soft_threshold_in_place(psi, beta_lambda);
    } else {
        // The ball constraint is active, so the answer is the projection of
        // psi itself (its threshold exceeds beta_lambda).
        project_l1_ball_in_place(psi, r);
    }
}

/// Largest violation of the optimality conditions for `x = P_{||.||_1 <= R}(v)`:
/// feasibility, `v - x` in `tau * d||x||_1` for some `tau >= 0`, and
/// `tau (R - ||x||_1) = 0`.
pub fn kkt_residual_l1ball(v: &[f64], x: &[f64], r: f64) -> f64 {
    let resid: Vec<f64> = v.iter().zip(x).map(|(a, b)| a - b).collect();
    let on_support: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0.0).collect();
    let tau = if on_support.is_empty() {
        resid.iter().fold(0.0f64, |m, r| m.max(r.abs()))
    } else {
        on_support.iter().map(|&j| resid[j] * x[j].signum()).sum::<f64>() / on_support.len() as f64
    };
    let norm = l1_norm(x);
    let mut worst = (norm - r).max(0.0).max(-tau);
    for j in 0..x.len() {
        let v = if x[j] != 0.0 { (resid[j] - tau * x[j].signum()).abs() } else { resid[j].abs() - tau };
        worst = worst.max(v);
    }
    worst.max(tau.max(0.0) * (r - norm).max(0.0))
}
