//! The five solver loops, their termination rules, and the potential-function
//! monitors that assert the decrease certificates at run time.
//!
//! Three extrapolated reweighted l1 solvers share the same subproblem kernel
//! with different momentum schedules; two line-search baselines (a shrinkage
//! method on the log penalty and a reweighted l1 method) use nonmonotone
//! acceptance with spectral initial steps. All solvers start at the origin,
//! which must lie in the box.

mod extrapolated;
mod line_search;
mod monitor;

pub use extrapolated::{solve_irl1e1, solve_irl1e2, solve_irl1e3};
pub use line_search::{solve_gist, solve_irl1ls};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{nrm2_diff_sq, nrm2};
use crate::problem::ProblemInstance;

/// Identifies one of the five solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Irl1E1,
    Irl1E2,
    Irl1E3,
    Gist,
    Irl1Ls,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] =
        [SolverKind::Irl1E1, SolverKind::Irl1E2, SolverKind::Irl1E3, SolverKind::Gist, SolverKind::Irl1Ls];

    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Irl1E1 => "irl1e1",
            SolverKind::Irl1E2 => "irl1e2",
            SolverKind::Irl1E3 => "irl1e3",
            SolverKind::Gist => "gist",
            SolverKind::Irl1Ls => "irl1ls",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "irl1e1" => Ok(SolverKind::Irl1E1),
            "irl1e2" => Ok(SolverKind::Irl1E2),
            "irl1e3" => Ok(SolverKind::Irl1E3),
            "gist" => Ok(SolverKind::Gist),
            "irl1ls" => Ok(SolverKind::Irl1Ls),
            other => Err(Error::Parse(format!("unknown solver: {other}"))),
        }
    }
}

/// Solver configuration. Defaults match the benchmark setup: tolerance 1e-4,
/// line-search constants `c = 1e-4`, `tau = 2`, memory `M = 4`, spectral step
/// clamp `[1e-8, 1e8]`, and split parameter 0.95 for the type-III schedule.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Record a per-iteration trace and assert the decrease certificates.
    pub monitor: bool,
    /// Absolute slack absorbing floating-point noise in the certificates.
    pub monitor_slack: f64,
    /// Split parameter of the type-III schedule condition.
    pub gamma: f64,
    /// Sufficient-decrease constant `c` of the nonmonotone acceptance test.
    pub sufficient_decrease: f64,
    /// Step growth factor `tau` on line-search rejection.
    pub backtrack_factor: f64,
    /// Number `M` of previous objective values the acceptance test looks at
    /// beyond the current one.
    pub nonmonotone_memory: usize,
    pub l_min: f64,
    pub l_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-4,
            max_iter: 1_000_000,
            monitor: false,
            monitor_slack: 1e-9,
            gamma: 0.95,
            sufficient_decrease: 1e-4,
            backtrack_factor: 2.0,
            nonmonotone_memory: 4,
            l_min: 1e-8,
            l_max: 1e8,
        }
    }
}

impl SolverOptions {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        if !(self.monitor_slack >= 0.0) {
            return Err(Error::InvalidArgument("monitor_slack must be nonnegative".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.sufficient_decrease > 0.0) {
            return Err(Error::InvalidArgument("sufficient_decrease must be positive".into()));
        }
        if !(self.backtrack_factor > 1.0) {
            return Err(Error::InvalidArgument("backtrack_factor must exceed one".into()));
        }
        if !(self.l_min > 0.0 && self.l_min < self.l_max) {
            return Err(Error::InvalidArgument("need 0 < l_min < l_max".into()));
        }
        Ok(())
    }
}

/// One recorded iteration: objective, monitored potential, step length and
/// the number of line-search trials (one for the extrapolated solvers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub fval: f64,
    pub potential: f64,
    pub step_norm: f64,
    pub ls_trials: u32,
}

/// Outcome of one solver run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Terminal iterate (the certified point of each scheme).
    pub x_final: Vec<f64>,
    /// Objective recomputed at the terminal iterate.
    pub fval: f64,
    /// Outer iterations executed; line-search retries are counted in the
    /// trace, not here.
    pub iterations: usize,
    /// Stationarity residual recomputed independently of the in-loop rule.
    pub residual: f64,
    /// Final value of the in-loop termination quantity.
    pub surrogate_residual: f64,
    pub converged: bool,
    /// Wall time of the solve loop, excluding instance construction.
    pub wall_seconds: f64,
    /// Wall time the instance spent estimating its step constant.
    pub lipschitz_seconds: f64,
    /// Per-iteration records when monitoring was requested.
    pub trace: Option<Vec<TraceEntry>>,
}

impl SolveReport {
    /// Convergence means the normalized surrogate beat the tolerance.
    pub(crate) fn assemble(
        inst: &ProblemInstance,
        x_final: Vec<f64>,
        iterations: usize,
        converged: bool,
        surrogate_residual: f64,
        wall_seconds: f64,
        trace: Option<Vec<TraceEntry>>,
    ) -> Result<Self> {
        let fval = inst.objective(&x_final)?;
        let residual = inst.stationarity_residual(&x_final)?;
        Ok(SolveReport {
            x_final,
            fval,
            iterations,
            residual,
            surrogate_residual,
            converged,
            wall_seconds,
            lipschitz_seconds: inst.lipschitz_seconds(),
            trace,
        })
    }
}

/// Potential of the type-I/II schemes: objective plus quadratic coupling,
/// `F(x) + (L/2) ||x - y||^2`; infinite outside the box.
pub fn h1_value(inst: &ProblemInstance, x: &[f64], y: &[f64]) -> Result<f64> {
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    Ok(inst.objective(x)? + 0.5 * inst.lipschitz() * nrm2_diff_sq(x, y))
}

/// Potential of the type-III scheme,
/// `F(x) + (L/2) ||w - y||^2 + (L/2) ||w - x||^2`; infinite outside the box.
pub fn h3_value(inst: &ProblemInstance, x: &[f64], y: &[f64], w: &[f64]) -> Result<f64> {
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if w.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: w.len() });
    }
    let l = inst.lipschitz();
    Ok(inst.objective(x)? + 0.5 * l * (nrm2_diff_sq(w, y) + nrm2_diff_sq(w, x)))
}

/// Runs the requested solver from the origin.
pub fn solve(inst: &ProblemInstance, kind: SolverKind, opts: &SolverOptions) -> Result<SolveReport> {
    match kind {
        SolverKind::Irl1E1 => solve_irl1e1(inst, opts),
        SolverKind::Irl1E2 => solve_irl1e2(inst, opts),
        SolverKind::Irl1E3 => solve_irl1e3(inst, opts),
        SolverKind::Gist => solve_gist(inst, opts),
        SolverKind::Irl1Ls => solve_irl1ls(inst, opts),
    }
}

/// Shared entry checks: options are sane, the origin is feasible, iterates
/// will stay finite.
pub(crate) fn check_start(inst: &ProblemInstance, opts: &SolverOptions) -> Result<()> {
    opts.validate()?;
    let origin = vec![0.0; inst.n()];
    if !inst.bounds().contains(&origin) {
        return Err(Error::InvalidArgument("solvers start at the origin, which must lie in the box".into()));
    }
    Ok(())
}

pub(crate) fn ensure_finite(x: &[f64], what: &str, iteration: usize) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("{what} became non-finite at iteration {iteration}")));
    }
    Ok(())
}

/// `max(1, ||x||)` normalization used by every termination rule.
pub(crate) fn termination_scale(x: &[f64]) -> f64 {
    nrm2(x).max(1.0)
}
