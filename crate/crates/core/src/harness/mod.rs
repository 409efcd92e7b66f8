//! Experiment orchestration behind the command-line front end.
//!
//! Every command takes an [`ExperimentSpec`], writes fixed-name files under
//! `spec.out` and returns the in-memory result. Outputs are pure functions of
//! the spec: Monte-Carlo repetitions draw from `derive_seed(seed, REP)` and are
//! aggregated in index order, whatever the size of the worker pool.

mod analysis;
mod commands;
mod instance;
mod spec;

pub use analysis::{last_passing, linear_fit, mean_std, PlateauAnalysis};
pub use commands::{
    cmd_convergence, cmd_diagnose, cmd_generate, cmd_solve, cmd_sweep, input_hash, read_sweep_csv, worker_pool,
    write_sweep_csv, ConvergenceResult, ConvergenceRun, GenerateResult, Manifest, SolveResult, SweepResult, SweepRow,
    TruthFile, THREADS_ENV,
};
pub use instance::{rep_seed, Instance, LocalReference};
pub use spec::{DataSpec, ExperimentSpec, Init, LogGrid, NetworkSpec, SolverSpec, SweepAxis, SweepSpec};
