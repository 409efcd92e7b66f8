//! Sparse linear regression over a simulated network of agents.
//!
//! Each of `m` agents holds `n` rows of a design. Agents talk only to graph
//! neighbours through a symmetric doubly stochastic matrix `W`, and minimize
//! a penalized-consensus LASSO by synchronous proximal gradient rounds.
//!
//! - [`graph`]: topologies, Metropolis weights and spectra.
//! - [`datagen`]: sparse truths, AR(1) designs, partitioning and CSV input.
//! - [`proxops`]: soft-thresholding, l1-ball projection and their composition.
//! - [`solver`]: the distributed iteration, traces and a centralized ISTA baseline.
//! - [`theory`]: tuning rules, rate constants and error bounds.
//! - [`harness`]: experiment specs and the `generate`/`solve`/`sweep`/
//!   `convergence`/`diagnose` commands.
//!
//! ```no_run
//! use netlasso::harness::{cmd_solve, ExperimentSpec};
//!
//! let mut spec = ExperimentSpec::default();
//! spec.data.n_total = 200;
//! spec.data.d = 100;
//! spec.network.m = 10;
//! let res = cmd_solve(&spec)?;
//! println!("{:?}", res.trace.last());
//! # Ok::<(), netlasso::Error>(())
//! ```

pub mod datagen;
pub mod error;
pub mod graph;
pub mod harness;
pub mod proxops;
pub mod rng;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
