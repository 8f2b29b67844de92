//! Command-line front end for the coherence pipeline: single-point
//! evaluation, grid sweeps with plot-ready CSV/JSON export, and
//! side-by-side comparison against the finite-chain solver.
//!
//! Exit codes are a stable contract for scripting: 0 on success, 1 on
//! validation errors (bad flags, bad config, bad output path), 2 on
//! numerical failures (quadrature or eigensolver breakdown, tolerance
//! misses in the oracle comparison).

pub mod config;
pub mod output;
pub mod run;

pub use run::{run_cli, CliError};
