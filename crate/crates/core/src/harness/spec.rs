use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Topology, WeightRule};
use crate::theory::Constants;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSpec {
    /// Total training samples across agents.
    #[serde(rename = "N")]
    pub n_total: usize,
    pub d: usize,
    /// Support size; `ceil(ln d)` when absent.
    pub s: Option<usize>,
    pub sigma: f64,
    pub phi: f64,
    /// Held-out rows for `mse_test`; 0 disables the test set.
    pub n_test: usize,
    /// Real data instead of the synthetic generator.
    pub csv: Option<PathBuf>,
}

impl Default for DataSpec {
    fn default() -> Self {
        Self { n_total: 220, d: 400, s: None, sigma: 0.5, phi: crate::datagen::DEFAULT_PHI, n_test: 0, csv: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSpec {
    pub topology: Topology,
    pub m: usize,
    pub weights: WeightRule,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        Self { topology: Topology::Complete, m: 20, weights: WeightRule::LazyMetropolis }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// `theta^0 = 0`.
    #[default]
    Zero,
    /// Every agent starts at the centralized LASSO solution for the same lambda.
    Centralized,
}

/// Solver parameters. Absent values are filled by the selection rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    /// `null` in JSON means "use the default rule"; pass `inf` on the
    /// command line to drop the constraint.
    pub radius: Option<f64>,
    pub max_iters: usize,
    pub rel_tol: f64,
    /// When positive, overrides `rel_tol` with `rel_tol_per_beta * beta`.
    /// The per-round change is about `beta` times the gradient mapping, so
    /// this holds the stopping accuracy fixed across stepsizes.
    pub rel_tol_per_beta: f64,
    pub stride: usize,
    pub t0: f64,
    pub constants: Constants,
    pub init: Init,
    pub strict: bool,
    pub record_timing: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            lambda: None,
            gamma: None,
            beta: None,
            radius: None,
            max_iters: 10_000,
            rel_tol: 0.0,
            rel_tol_per_beta: 0.0,
            stride: 1,
            t0: 2.0,
            constants: Constants::default(),
            init: Init::Zero,
            strict: true,
            record_timing: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    #[default]
    None,
    Lambda,
    Gamma,
    D,
    M,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::None => "none",
            SweepAxis::Lambda => "lambda",
            SweepAxis::Gamma => "gamma",
            SweepAxis::D => "d",
            SweepAxis::M => "m",
        }
    }
}

/// Logarithmic grid `lo, lo 10^(1/k), ..., hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub per_decade: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self { lo: 1e-7, hi: 1e-1, per_decade: 8 }
    }
}

impl LogGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.lo > 0.0 && self.hi >= self.lo && self.per_decade > 0) {
            return Err(Error::invalid(format!("bad log grid {self:?}")));
        }
        let steps = ((self.hi / self.lo).log10() * self.per_decade as f64 + 1e-9).floor() as usize;
        Ok((0..=steps).map(|k| self.lo * 10f64.powf(k as f64 / self.per_decade as f64)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    /// Axis values (lambda, gamma, d or m).
    pub grid: Vec<f64>,
    /// Relative accuracy band around the centralized error.
    pub band: f64,
    /// `s ln d / N` held fixed on the d axis.
    pub n_ratio: Option<f64>,
    /// Candidate gammas for critical-gamma searches.
    pub gamma_grid: LogGrid,
    /// Penalty values for `convergence`.
    pub gammas: Vec<f64>,
    /// When set, `convergence` runs `ceil(budget_gamma / gamma)` rounds per gamma.
    pub budget_gamma: Option<f64>,
    /// When set, `convergence` records about this many points per trace.
    pub points_per_trace: Option<usize>,
    /// Relative tolerance defining the plateau in convergence summaries.
    pub plateau_tol: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            axis: SweepAxis::None,
            grid: Vec::new(),
            band: 0.03,
            n_ratio: None,
            gamma_grid: LogGrid::default(),
            gammas: vec![1e-3, 1e-4, 1e-5],
            budget_gamma: None,
            points_per_trace: None,
            plateau_tol: 0.01,
        }
    }
}

/// Complete description of an experiment; round-trips through JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub data: DataSpec,
    pub network: NetworkSpec,
    pub solver: SolverSpec,
    pub sweep: SweepSpec,
    pub reps: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            data: DataSpec::default(),
            network: NetworkSpec::default(),
            solver: SolverSpec::default(),
            sweep: SweepSpec::default(),
            reps: 30,
            seed: 0,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentSpec {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn sparsity(&self) -> usize {
        self.data.s.unwrap_or_else(|| crate::datagen::default_sparsity(self.data.d))
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.data;
        if d.csv.is_none() {
            if d.n_total == 0 || d.d < 2 {
                return Err(Error::invalid(format!("need N >= 1 and d >= 2, got N={} d={}", d.n_total, d.d)));
            }
            if self.sparsity() == 0 || self.sparsity() > d.d {
                return Err(Error::invalid(format!("sparsity {} must lie in 1..=d", self.sparsity())));
            }
            if !(d.phi.abs() < 1.0) || !(d.sigma >= 0.0) {
                return Err(Error::invalid("need |phi| < 1 and sigma >= 0"));
            }
            if self.network.m == 0 || d.n_total % self.network.m != 0 {
                return Err(Error::invalid(format!("m={} must divide N={}", self.network.m, d.n_total)));
            }
        }
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        let s = &self.solver;
        if s.stride == 0 {
            return Err(Error::invalid("stride must be at least 1"));
        }
        if !(s.rel_tol >= 0.0 && s.rel_tol_per_beta >= 0.0) {
            return Err(Error::invalid("tolerances must be nonnegative"));
        }
        s.constants.validate()?;
        let w = &self.sweep;
        if w.axis != SweepAxis::None && w.axis != SweepAxis::Gamma && w.grid.is_empty() {
            return Err(Error::invalid(format!("sweep axis {} needs a nonempty grid", w.axis.name())));
        }
        if w.grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("sweep grid values must be positive"));
        }
        if !(w.band >= 0.0) {
            return Err(Error::invalid("band must be nonnegative"));
        }
        if w.axis == SweepAxis::D && w.n_ratio.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::invalid("n_ratio must be positive"));
        }
        if w.gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::invalid("convergence gammas must be positive"));
        }
        Ok(())
    }
}
