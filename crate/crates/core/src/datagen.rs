//! Synthetic sparse-regression data, agent partitioning and CSV ingestion.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::symmetric_eigenvalues;
use crate::rng;

/// Default AR(1) coefficient of the synthetic design.
pub const DEFAULT_PHI: f64 = 0.25;

/// Sparse ground truth `theta*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub theta_star: Vec<f64>,
    /// Sorted indices of the nonzero entries.
    pub support: Vec<usize>,
    pub s: usize,
    pub l1_norm: f64,
}

impl GroundTruth {
    pub fn from_vector(theta_star: Vec<f64>) -> Self {
        let support: Vec<usize> = theta_star.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect();
        let l1_norm = theta_star.iter().map(|v| v.abs()).sum();
        Self { s: support.len(), support, theta_star, l1_norm }
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    pub fn vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.theta_star)
    }

    pub fn in_support(&self, j: usize) -> bool {
        self.support.binary_search(&j).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    Synthetic { seed: u64 },
    Csv { path: PathBuf },
    Split { parent: Box<Provenance>, seed: u64, part: String },
}

/// Stacked design and response `y = X theta* + w`.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub noise_sigma: f64,
    /// The realised noise vector, kept for synthetic data only.
    pub noise: Option<DVector<f64>>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, noise_sigma: f64, provenance: Provenance) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::dims(format!("X has {} rows but y has {} entries", x.nrows(), y.len())));
        }
        Ok(Self { x, y, noise_sigma, noise: None, provenance })
    }

    pub fn samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Writes `y, x_1, ..., x_d` per row with 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_csv_to<W: Write>(&self, out: &mut W) -> Result<()> {
        let mut line = String::new();
        for r in 0..self.samples() {
            line.clear();
            line.push_str(&format!("{:.16e}", self.y[r]));
            for c in 0..self.dim() {
                line.push(',');
                line.push_str(&format!("{:.16e}", self.x[(r, c)]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// One agent's private slice of the data.
#[derive(Clone, Debug)]
pub struct Shard {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub noise: Option<DVector<f64>>,
}

impl Shard {
    pub fn samples(&self) -> usize {
        self.x.nrows()
    }

    /// `lambda_max(X_i^T X_i / n)`, via the smaller of the two Gram matrices.
    pub fn smoothness(&self) -> Result<f64> {
        let n = self.samples() as f64;
        let gram = if self.x.nrows() <= self.x.ncols() { &self.x * self.x.transpose() } else { self.x.tr_mul(&self.x) };
        Ok(symmetric_eigenvalues(&gram)?[0].max(0.0) / n)
    }
}

/// Contiguous row blocks of a dataset, one per agent.
#[derive(Clone, Debug)]
pub struct AgentShards {
    pub m: usize,
    pub n: usize,
    pub shards: Vec<Shard>,
}

impl AgentShards {
    pub fn dim(&self) -> usize {
        self.shards[0].x.ncols()
    }

    pub fn total_samples(&self) -> usize {
        self.m * self.n
    }

    /// Vertical concatenation of the shards.
    pub fn reassemble(&self) -> (DMatrix<f64>, DVector<f64>) {
        let d = self.dim();
        let total = self.total_samples();
        let mut x = DMatrix::zeros(total, d);
        let mut y = DVector::zeros(total);
        for (i, shard) in self.shards.iter().enumerate() {
            x.rows_mut(i * self.n, self.n).copy_from(&shard.x);
            y.rows_mut(i * self.n, self.n).copy_from(&shard.y);
        }
        (x, y)
    }

    /// `L_max = max_i lambda_max(X_i^T X_i / n)`.
    pub fn l_max(&self) -> Result<f64> {
        self.shards.iter().try_fold(0.0f64, |acc, s| Ok(acc.max(s.smoothness()?)))
    }

    /// `max_i ||w_i^T X_i||_inf`; needs the realised noise.
    pub fn noise_correlation_max(&self) -> Result<f64> {
        let mut best = 0.0f64;
        for (i, shard) in self.shards.iter().enumerate() {
            let w = shard.noise.as_ref().ok_or_else(|| Error::MissingNoise(format!("shard {i} has no noise record")))?;
            let corr = shard.x.tr_mul(w);
            best = best.max(corr.amax());
        }
        Ok(best)
    }
}

/// `s = ceil(ln d)`, the default sparsity level.
pub fn default_sparsity(d: usize) -> usize {
    ((d as f64).ln().ceil() as usize).clamp(1, d)
}

/// Draws `theta* ~ N(0, I_d)` and zeroes its `d - s` smallest-magnitude entries.
pub fn gen_sparse_truth(d: usize, s: usize, seed: u64) -> Result<GroundTruth> {
    if s == 0 || s > d {
        return Err(Error::invalid(format!("sparsity must satisfy 1 <= s <= d, got s={s}, d={d}")));
    }
    let mut rng = rng::substream(seed, rng::tags::TRUTH);
    let mut theta: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| theta[a].abs().total_cmp(&theta[b].abs()));
    for &j in &order[..d - s] {
        theta[j] = 0.0;
    }
    Ok(GroundTruth::from_vector(theta))
}

/// Rows are independent stationary AR(1) sequences:
/// `x_1 = z_1 / sqrt(1 - phi^2)`, `x_{t+1} = phi x_t + z_{t+1}`. Row `r` uses
/// its own sub-stream, so the output does not depend on generation order.
pub fn gen_ar_design(samples: usize, d: usize, phi: f64, seed: u64) -> Result<DMatrix<f64>> {
    if samples == 0 || d < 2 {
        return Err(Error::invalid(format!("need N >= 1 and d >= 2, got N={samples}, d={d}")));
    }
    if !(phi.abs() < 1.0) {
        return Err(Error::invalid(format!("AR coefficient must satisfy |phi| < 1, got {phi}")));
    }
    let design_seed = rng::derive_seed(seed, rng::tags::DESIGN);
    let scale = 1.0 / (1.0 - phi * phi).sqrt();
    let mut x = DMatrix::zeros(samples, d);
    for r in 0..samples {
        let mut rng = rng::substream(design_seed, r as u64);
        let mut prev = rng.sample::<f64, _>(StandardNormal) * scale;
        x[(r, 0)] = prev;
        for t in 1..d {
            prev = phi * prev + rng.sample::<f64, _>(StandardNormal);
            x[(r, t)] = prev;
        }
    }
    Ok(x)
}

/// Population covariance of the AR(1) rows: `phi^|j-k| / (1 - phi^2)`.
pub fn ar1_covariance(d: usize, phi: f64) -> DMatrix<f64> {
    let scale = 1.0 / (1.0 - phi * phi);
    DMatrix::from_fn(d, d, |j, k| scale * phi.powi((j as i32 - k as i32).abs()))
}

/// Spectral summary of the population covariance used by the theory module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSummary {
    /// `max_i Sigma_ii`
    pub zeta: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl CovarianceSummary {
    pub fn of(sigma: &DMatrix<f64>) -> Result<Self> {
        let eig = symmetric_eigenvalues(sigma)?;
        let zeta = sigma.diagonal().max();
        Ok(Self { zeta, lambda_min: *eig.last().unwrap(), lambda_max: eig[0] })
    }

    pub fn ar1(d: usize, phi: f64) -> Result<Self> {
        Self::of(&ar1_covariance(d, phi))
    }

    pub fn condition_number(&self) -> f64 {
        self.lambda_max / self.lambda_min
    }
}

/// `y = X theta* + w`, `w ~ N(0, sigma^2 I)`. The noise is recorded.
pub fn gen_observations(x: DMatrix<f64>, truth: &GroundTruth, sigma: f64, seed: u64) -> Result<Dataset> {
    if !(sigma >= 0.0) {
        return Err(Error::invalid(format!("noise level must be nonnegative, got {sigma}")));
    }
    if x.ncols() != truth.dim() {
        return Err(Error::dims(format!("X has {} columns, theta* has {}", x.ncols(), truth.dim())));
    }
    let mut rng = rng::substream(seed, rng::tags::NOISE);
    let noise = DVector::from_fn(x.nrows(), |_, _| sigma * rng.sample::<f64, _>(StandardNormal));
    let y = &x * truth.vector() + &noise;
    Ok(Dataset { x, y, noise_sigma: sigma, noise: Some(noise), provenance: Provenance::Synthetic { seed } })
}

/// Full synthetic instance with independent sub-seeds for truth, design and
/// noise.
pub fn synthetic_problem(samples: usize, d: usize, s: usize, sigma: f64, phi: f64, seed: u64) -> Result<(GroundTruth, Dataset)> {
    let truth = gen_sparse_truth(d, s, rng::derive_seed(seed, rng::tags::TRUTH))?;
    let x = gen_ar_design(samples, d, phi, rng::derive_seed(seed, rng::tags::DESIGN))?;
    let mut ds = gen_observations(x, &truth, sigma, rng::derive_seed(seed, rng::tags::NOISE))?;
    ds.provenance = Provenance::Synthetic { seed };
    Ok((truth, ds))
}

/// Splits the rows into `m` contiguous blocks of equal size.
pub fn partition(ds: &Dataset, m: usize) -> Result<AgentShards> {
    let total = ds.samples();
    if m == 0 || total % m != 0 {
        return Err(Error::invalid(format!("m={m} must divide N={total}")));
    }
    let n = total / m;
    let shards = (0..m)
        .map(|i| Shard {
            x: ds.x.rows(i * n, n).into_owned(),
            y: ds.y.rows(i * n, n).into_owned(),
            noise: ds.noise.as_ref().map(|w| w.rows(i * n, n).into_owned()),
        })
        .collect();
    Ok(AgentShards { m, n, shards })
}

/// Reads `y, x_1..x_d` rows. A leading row with any non-numeric cell is
/// treated as a header.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let csv_err = |msg: String| Error::Csv { path: path.to_path_buf(), msg };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(e.to_string()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if idx == 0 => continue,
            Err(e) => return Err(csv_err(format!("row {}: non-numeric cell ({e})", idx + 1))),
        };
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(csv_err(format!("row {} has {} cells, expected {w}", idx + 1, values.len())));
            }
            _ => {}
        }
        rows.push(values);
    }
    let width = width.ok_or_else(|| csv_err("no data rows".into()))?;
    if width < 2 {
        return Err(csv_err("need a response column and at least one feature".into()));
    }
    let d = width - 1;
    let x = DMatrix::from_fn(rows.len(), d, |r, c| rows[r][c + 1]);
    let y = DVector::from_fn(rows.len(), |r, _| rows[r][0]);
    Dataset::new(x, y, 0.0, Provenance::Csv { path: path.to_path_buf() })
}

/// Seeded random split into `(train, test)` with `n_test` test rows.
pub fn train_test_split(ds: &Dataset, n_test: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let total = ds.samples();
    if n_test >= total {
        return Err(Error::invalid(format!("n_test={n_test} must be smaller than N={total}")));
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut rng::substream(seed, rng::tags::SPLIT));
    let (test_idx, train_idx) = order.split_at(n_test);
    let take = |idx: &[usize], part: &str| {
        let x = ds.x.select_rows(idx.iter());
        let y = DVector::from_iterator(idx.len(), idx.iter().map(|&r| ds.y[r]));
        let noise = ds.noise.as_ref().map(|w| DVector::from_iterator(idx.len(), idx.iter().map(|&r| w[r])));
        Dataset {
            x,
            y,
            noise_sigma: ds.noise_sigma,
            noise,
            provenance: Provenance::Split { parent: Box::new(ds.provenance.clone()), seed, part: part.into() },
        }
    };
    Ok((take(train_idx, "train"), take(test_idx, "test")))
}
