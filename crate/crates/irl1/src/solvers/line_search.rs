//! Line-search baselines: a shrinkage-thresholding method using the scalar
//! log prox, and a reweighted l1 method with the same nonmonotone acceptance.
//!
//! Both initialize the step constant from the spectral ratio
//! `||A(x^k - x^{k-1})||^2 / ||x^k - x^{k-1}||^2` clamped to
//! `[l_min, l_max]`, accept a candidate when its objective beats the maximum
//! of the last `M + 1` objective values by `(c/2) ||dx||^2`, and grow the
//! step constant by `tau` otherwise.

use std::collections::VecDeque;
use std::mem;
use std::time::Instant;

use super::monitor::EnvelopeMonitor;
use super::{check_start, ensure_finite, termination_scale, SolveReport, SolverOptions, TraceEntry};
use crate::error::{Error, Result};
use crate::linalg::{nrm2_diff, nrm2_diff_sq};
use crate::problem::ProblemInstance;
use crate::prox::{prox_scalar_log, prox_weighted_l1_box_into};

/// Objective window for the nonmonotone acceptance test.
struct ObjectiveWindow {
    values: VecDeque<f64>,
    capacity: usize,
}

impl ObjectiveWindow {
    fn new(memory: usize, initial: f64) -> Self {
        let mut values = VecDeque::with_capacity(memory + 1);
        values.push_back(initial);
        ObjectiveWindow { values, capacity: memory + 1 }
    }

    fn reference(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |acc, &v| acc.max(v))
    }

    fn push(&mut self, value: f64) {
        self.values.push_back(value);
        if self.values.len() > self.capacity {
            self.values.pop_front();
        }
    }
}

/// Spectral initial step for the next iteration, from the accepted move.
fn spectral_step(residual_diff_sq: f64, step_sq: f64, opts: &SolverOptions) -> f64 {
    if step_sq > 0.0 {
        (residual_diff_sq / step_sq).clamp(opts.l_min, opts.l_max)
    } else {
        1.0
    }
}

/// Shrinkage-thresholding on the log penalty with spectral steps and
/// nonmonotone line search. Requires the log penalty and an unconstrained
/// problem: the scalar subproblem has a closed form only there.
pub fn solve_gist(inst: &ProblemInstance, opts: &SolverOptions) -> Result<SolveReport> {
    check_start(inst, opts)?;
    let (lambda, eps) = inst
        .penalty()
        .log_params()
        .ok_or_else(|| Error::InvalidArgument("this solver needs the log penalty".into()))?;
    if !inst.bounds().is_unbounded() {
        return Err(Error::InvalidArgument("this solver needs an unconstrained problem".into()));
    }
    let started = Instant::now();
    let (m, n) = (inst.m(), inst.n());

    let mut x = vec![0.0; n];
    let mut candidate = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut grad_next = vec![0.0; n];
    let mut r = vec![0.0; m];
    let mut r_cand = vec![0.0; m];

    inst.residual_into(&x, &mut r);
    inst.matrix().matvec_t(&r, &mut grad);
    let mut window = ObjectiveWindow::new(opts.nonmonotone_memory, inst.objective_from_residual(&x, &r));
    let mut monitor = opts.monitor.then(|| EnvelopeMonitor::new(opts.monitor_slack));
    let mut trace = opts.monitor.then(Vec::new);

    let mut next_initial_step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut surrogate = f64::INFINITY;

    for k in 0..opts.max_iter {
        let mut step = next_initial_step;
        let reference = window.reference();
        let mut trials = 0u32;
        let (fval, step_sq) = loop {
            trials += 1;
            for i in 0..n {
                candidate[i] = prox_scalar_log(x[i] - grad[i] / step, step, lambda, eps)?;
            }
            inst.residual_into(&candidate, &mut r_cand);
            let fval = inst.objective_from_residual(&candidate, &r_cand);
            let step_sq = nrm2_diff_sq(&candidate, &x);
            if fval <= reference - 0.5 * opts.sufficient_decrease * step_sq {
                break (fval, step_sq);
            }
            step *= opts.backtrack_factor;
            if step > opts.l_max {
                return Err(Error::Numerical(format!(
                    "line search exceeded the step cap at iteration {k}"
                )));
            }
        };
        ensure_finite(&candidate, "iterate", k)?;
        inst.matrix().matvec_t(&r_cand, &mut grad_next);

        let step_norm = step_sq.sqrt();
        surrogate = (nrm2_diff(&grad, &grad_next) + step * step_norm) / termination_scale(&candidate);

        if let Some(mon) = monitor.as_mut() {
            mon.record(k, reference, fval, 0.5 * opts.sufficient_decrease * step_sq)?;
            if let Some(tr) = trace.as_mut() {
                tr.push(TraceEntry { iteration: k, fval, potential: reference, step_norm, ls_trials: trials });
            }
        }

        window.push(fval);
        next_initial_step = spectral_step(nrm2_diff_sq(&r_cand, &r), step_sq, opts);
        mem::swap(&mut x, &mut candidate);
        mem::swap(&mut r, &mut r_cand);
        mem::swap(&mut grad, &mut grad_next);
        iterations = k + 1;
        if surrogate < opts.tol {
            converged = true;
            break;
        }
    }

    SolveReport::assemble(inst, x, iterations, converged, surrogate, started.elapsed().as_secs_f64(), trace)
}

/// Reweighted l1 with nonmonotone line search: fresh weights each outer
/// iteration, a weighted l1 prox candidate per trial, spectral initial steps.
pub fn solve_irl1ls(inst: &ProblemInstance, opts: &SolverOptions) -> Result<SolveReport> {
    check_start(inst, opts)?;
    let started = Instant::now();
    let (m, n) = (inst.m(), inst.n());
    let rho = inst.penalty().weight_lipschitz();

    let mut x = vec![0.0; n];
    let mut candidate = vec![0.0; n];
    let mut center = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut grad_next = vec![0.0; n];
    let mut s = Vec::with_capacity(n);
    let mut r = vec![0.0; m];
    let mut r_cand = vec![0.0; m];

    inst.residual_into(&x, &mut r);
    inst.matrix().matvec_t(&r, &mut grad);
    let mut window = ObjectiveWindow::new(opts.nonmonotone_memory, inst.objective_from_residual(&x, &r));
    let mut monitor = opts.monitor.then(|| EnvelopeMonitor::new(opts.monitor_slack));
    let mut trace = opts.monitor.then(Vec::new);

    let mut next_initial_step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut surrogate = f64::INFINITY;

    for k in 0..opts.max_iter {
        inst.penalty().weights_into(&x, &mut s);
        let mut step = next_initial_step;
        let reference = window.reference();
        let mut trials = 0u32;
        let (fval, step_sq, accepted_step) = loop {
            trials += 1;
            for i in 0..n {
                center[i] = x[i] - grad[i] / step;
            }
            prox_weighted_l1_box_into(&center, &s, step, inst.bounds(), &mut candidate)?;
            inst.residual_into(&candidate, &mut r_cand);
            let fval = inst.objective_from_residual(&candidate, &r_cand);
            let step_sq = nrm2_diff_sq(&candidate, &x);
            if fval <= reference - 0.5 * opts.sufficient_decrease * step_sq {
                break (fval, step_sq, step);
            }
            step *= opts.backtrack_factor;
            if step > opts.l_max {
                return Err(Error::Numerical(format!(
                    "line search exceeded the step cap at iteration {k}"
                )));
            }
        };
        ensure_finite(&candidate, "iterate", k)?;
        inst.matrix().matvec_t(&r_cand, &mut grad_next);

        let step_norm = step_sq.sqrt();
        surrogate = (nrm2_diff(&grad, &grad_next) + (accepted_step + rho) * step_norm)
            / termination_scale(&candidate);

        if let Some(mon) = monitor.as_mut() {
            mon.record(k, reference, fval, 0.5 * opts.sufficient_decrease * step_sq)?;
            if let Some(tr) = trace.as_mut() {
                tr.push(TraceEntry { iteration: k, fval, potential: reference, step_norm, ls_trials: trials });
            }
        }

        window.push(fval);
        next_initial_step = spectral_step(nrm2_diff_sq(&r_cand, &r), step_sq, opts);
        mem::swap(&mut x, &mut candidate);
        mem::swap(&mut r, &mut r_cand);
        mem::swap(&mut grad, &mut grad_next);
        iterations = k + 1;
        if surrogate < opts.tol {
            converged = true;
            break;
        }
    }

    SolveReport::assemble(inst, x, iterations, converged, surrogate, started.elapsed().as_secs_f64(), trace)
}
