use nalgebra::DVector;

use crate::error::{Error, Result};

/// Stacked iterate `(theta_1, ..., theta_m)`, one block per agent.
#[derive(Clone, Debug, PartialEq)]
pub struct StackedState {
    pub blocks: Vec<DVector<f64>>,
    pub iteration: usize,
}

impl StackedState {
    pub fn new(blocks: Vec<DVector<f64>>) -> Result<Self> {
        let d = blocks.first().map(|b| b.len()).ok_or_else(|| Error::invalid("state needs at least one block"))?;
        if blocks.iter().any(|b| b.len() != d) {
            return Err(Error::dims("state blocks have different dimensions"));
        }
        Ok(Self { blocks, iteration: 0 })
    }

    pub fn zeros(m: usize, d: usize) -> Self {
        Self { blocks: vec![DVector::zeros(d); m], iteration: 0 }
    }

    /// `1 ⊗ theta`.
    pub fn consensual(m: usize, theta: &DVector<f64>) -> Self {
        Self { blocks: vec![theta.clone(); m], iteration: 0 }
    }

    pub fn agents(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].len()
    }

    pub fn average(&self) -> DVector<f64> {
        let mut avg = DVector::zeros(self.dim());
        for b in &self.blocks {
            avg += b;
        }
        avg / self.agents() as f64
    }

    /// Disagreement blocks `theta_i - theta_av`; they sum to zero.
    pub fn orthogonal(&self) -> Vec<DVector<f64>> {
        let avg = self.average();
        self.blocks.iter().map(|b| b - &avg).collect()
    }

    /// `(1/m) ||theta_perp||^2`.
    pub fn consensus_err(&self) -> f64 {
        let avg = self.average();
        self.blocks.iter().map(|b| (b - &avg).norm_squared()).sum::<f64>() / self.agents() as f64
    }

    /// `(1/m) sum_i ||theta_i - theta*||^2`.
    pub fn avg_est_err(&self, theta_star: &DVector<f64>) -> f64 {
        self.blocks.iter().map(|b| (b - theta_star).norm_squared()).sum::<f64>() / self.agents() as f64
    }

    pub fn max_l1(&self) -> f64 {
        self.blocks.iter().map(|b| b.lp_norm(1)).fold(0.0, f64::max)
    }

    /// Blockwise difference `self - other`.
    pub fn difference(&self, other: &StackedState) -> Result<StackedState> {
        if self.agents() != other.agents() || self.dim() != other.dim() {
            return Err(Error::dims("states have different shapes"));
        }
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect();
        Ok(StackedState { blocks, iteration: self.iteration })
    }

    /// First agent holding a non-finite entry.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.blocks.iter().position(|b| b.iter().any(|v| !v.is_finite()))
    }
}
