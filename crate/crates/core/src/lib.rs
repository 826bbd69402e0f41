//! Transposable N:M sparse masks.
//!
//! A weight matrix is cut into `m x m` blocks; in each block we look for a
//! 0/1 mask with exactly `n` ones in every row and every column that keeps
//! as much weight magnitude as possible. The main solver relaxes the problem
//! to an entropy-regularized transport plan ([`dykstra`]) and rounds it
//! ([`rounding`]). [`exact`] provides optimal oracles, [`baselines`] the
//! usual heuristics, and [`layerwise`] an ADMM layer pruner that uses the
//! mask solver as its projection.

pub mod baselines;
pub mod bench;
pub mod block;
pub mod cli;
pub mod dykstra;
pub mod error;
pub mod exact;
pub mod io;
pub mod layerwise;
pub mod rounding;

pub use block::{
    assemble_mask, check_at_most, check_feasible, mask_objective, partition_blocks, BinaryMaskBatch,
    BlockBatch, DenseMatrix, FeasibilityReport, MaskObjectiveReport, SparsityPattern,
};
pub use dykstra::{dykstra_solve, marginal_violation, DykstraConfig, FractionalMask, TauMode};
pub use error::{Error, Result};
pub use exact::{brute_force, exact_solve, relative_error};
pub use rounding::{solve_batch, solve_mask, MaskSolution, RoundingConfig};
