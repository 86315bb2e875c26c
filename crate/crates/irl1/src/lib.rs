//! Iteratively reweighted l1 solvers with extrapolation for sparsity
//! regularized least squares, plus two line-search baselines and a
//! reproducible random benchmark harness.
//!
//! The problem class is `min F(x) = 0.5 ||Ax - b||^2 + Phi(|x|) + delta_C(x)`
//! with a concave separable penalty `Phi` (log, SCAD, MCP or plain l1) and a
//! box `C`. Five solvers are provided:
//!
//! - [`solvers::solve_irl1e1`]: reweighting with momentum on the x-iterates
//!   (restarted FISTA coefficients),
//! - [`solvers::solve_irl1e2`]: reweighting with an auxiliary sequence and a
//!   periodic momentum table,
//! - [`solvers::solve_irl1e3`]: reweighting with an auxiliary sequence, a
//!   saturating momentum table and a second anchored prox,
//! - [`solvers::solve_gist`]: shrinkage-thresholding on the log penalty with
//!   spectral steps and nonmonotone line search,
//! - [`solvers::solve_irl1ls`]: reweighted l1 with the same line search.
//!
//! With monitoring enabled, the extrapolated solvers assert their potential
//! decrease certificates at run time and abort on any violation beyond the
//! configured slack.

// Validation uses `!(x > 0.0)` so NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod linalg;
pub mod penalty;
pub mod problem;
pub mod prox;
pub mod rng;
pub mod schedules;
pub mod solvers;

pub use error::{Error, Result};
pub use penalty::Penalty;
pub use problem::{generate_instance, InstanceRecipe, ProblemInstance};
pub use prox::BoxConstraint;
pub use solvers::{solve, SolveReport, SolverKind, SolverOptions};
