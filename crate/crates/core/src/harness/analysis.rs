//! Post-processing of traces and sweep aggregates.

use serde::{Deserialize, Serialize};

use crate::solver::IterationMetrics;

/// Sample mean and (n-1)-normalized standard deviation; `std = 0` for one value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Least-squares line `y = a + b x`; returns `(a, b, R^2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((my - b * mx, b, r2))
}

/// Shape of an error-versus-iteration curve that falls and then flattens.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauAnalysis {
    /// Final recorded error.
    pub plateau: f64,
    /// First recorded iteration after which the error stays within
    /// `tol * plateau` of the plateau.
    pub iters_to_plateau: usize,
    /// `R^2` of `ln(err)` against the iteration over the points before
    /// `iters_to_plateau`.
    pub r_squared_log_err: Option<f64>,
    /// `R^2` of `ln(err - plateau)` over the same points.
    pub r_squared_log_excess: Option<f64>,
    /// Fitted per-round contraction of the excess, `exp(slope)`.
    pub excess_rate: Option<f64>,
}

impl PlateauAnalysis {
    /// `series` holds `(iter, err)` pairs in increasing `iter`.
    pub fn of(series: &[(usize, f64)], tol: f64) -> Option<Self> {
        let &(_, plateau) = series.last()?;
        if !(plateau.is_finite() && plateau > 0.0) {
            return None;
        }
        let band = tol * plateau;
        let mut first = series.len() - 1;
        while first > 0 && (series[first - 1].1 - plateau).abs() <= band {
            first -= 1;
        }
        let pre = &series[..first];
        let xs: Vec<f64> = pre.iter().map(|p| p.0 as f64).collect();
        let log_err: Vec<f64> = pre.iter().map(|p| p.1.ln()).collect();
        let log_excess: Vec<f64> = pre.iter().map(|p| (p.1 - plateau).abs().ln()).collect();
        let excess_fit = linear_fit(&xs, &log_excess);
        Some(Self {
            plateau,
            iters_to_plateau: series[first].0,
            r_squared_log_err: linear_fit(&xs, &log_err).map(|f| f.2),
            r_squared_log_excess: excess_fit.map(|f| f.2),
            excess_rate: excess_fit.map(|f| f.1.exp()),
        })
    }

    /// Uses `avg_est_err`, falling back to `mse_test`.
    pub fn of_trace(metrics: &[IterationMetrics], tol: f64) -> Option<Self> {
        let series: Vec<(usize, f64)> =
            metrics.iter().filter_map(|m| m.avg_est_err.or(m.mse_test).map(|e| (m.iter, e))).collect();
        Self::of(&series, tol)
    }
}

/// Largest index `i` with `passes(i)`, assuming `passes` is true on a prefix
/// of `0..len` and false afterwards. Evaluates `O(log len)` indices and
/// never probes an endpoint it does not need. `None` when nothing passes.
pub fn last_passing<E>(len: usize, mut passes: impl FnMut(usize) -> Result<bool, E>) -> Result<Option<usize>, E> {
    let (mut lo, mut hi) = (-1isize, len as isize);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid as usize)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo >= 0).then_some(lo as usize))
}
