//! The three extrapolated reweighted l1 solvers.
//!
//! Each iteration reweights the penalty at the current point, forms an
//! extrapolated point, and solves one (or two) weighted l1 prox subproblems.
//! The momentum schedules and termination rules follow the benchmark setup;
//! the cores are parameterized over the schedule so degenerate choices can be
//! exercised directly.

use std::mem;
use std::time::Instant;

use super::monitor::{DropMonitor, E1Monitor};
use super::{check_start, ensure_finite, termination_scale, SolveReport, SolverOptions, TraceEntry};
use crate::error::Result;
use crate::linalg::{nrm2_diff, nrm2_diff_sq};
use crate::problem::ProblemInstance;
use crate::prox::{prox_weighted_l1_box_into, scalar_subdifferential_distance};
use crate::schedules::{
    adaptive_restart_test, FistaState, ThetaScheduleE2, ThetaScheduleE3, VALIDATION_DELTA,
};
use crate::Error;

/// Momentum source for the type-I core.
pub(crate) enum BetaSource {
    /// FISTA coefficients with fixed and adaptive restarts.
    Fista(FistaState),
    /// Fixed coefficient; restart requests are ignored.
    #[allow(dead_code)]
    Constant(f64),
}

impl BetaSource {
    fn next(&mut self, restart_requested: bool) -> f64 {
        match self {
            BetaSource::Fista(state) => state.next_beta(restart_requested),
            BetaSource::Constant(beta) => *beta,
        }
    }
}

/// Asserts the componentwise optimality certificate of a prox output. The
/// tolerance scales with the step constant so the check stays meaningful
/// when steps are large.
fn certify_prox(
    center: &[f64],
    s: &[f64],
    step: f64,
    out: &[f64],
    inst: &ProblemInstance,
    iteration: usize,
) -> Result<()> {
    let tol = 1e-9 * step.max(1.0);
    let (lo, hi) = (inst.bounds().lower(), inst.bounds().upper());
    for i in 0..out.len() {
        let r = scalar_subdifferential_distance(step * (out[i] - center[i]), s[i], out[i], lo[i], hi[i]);
        if r > tol {
            return Err(Error::Numerical(format!(
                "prox optimality certificate failed at iteration {iteration}, component {i}: \
                 residual {r}"
            )));
        }
    }
    Ok(())
}

/// Type-I scheme: momentum on the x-iterates.
pub fn solve_irl1e1(inst: &ProblemInstance, opts: &SolverOptions) -> Result<SolveReport> {
    run_e1(inst, opts, BetaSource::Fista(FistaState::new()))
}

pub(crate) fn run_e1(
    inst: &ProblemInstance,
    opts: &SolverOptions,
    mut beta_source: BetaSource,
) -> Result<SolveReport> {
    check_start(inst, opts)?;
    let started = Instant::now();
    let (m, n) = (inst.m(), inst.n());
    let l = inst.lipschitz();
    let rho = inst.penalty().weight_lipschitz();

    let mut x_prev = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut y_prev = vec![0.0; n];
    let mut x_next = vec![0.0; n];
    let mut center = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut s = Vec::with_capacity(n);
    let mut r = vec![0.0; m];

    let mut monitor = if opts.monitor {
        Some(E1Monitor::new(l, opts.monitor_slack, inst.objective(&x)?))
    } else {
        None
    };
    let mut trace = opts.monitor.then(Vec::new);

    let mut iterations = 0;
    let mut converged = false;
    let mut surrogate = f64::INFINITY;

    for k in 0..opts.max_iter {
        inst.penalty().weights_into(&x, &mut s);
        let restart = k > 0 && adaptive_restart_test(&y_prev, &x, &x_prev)?;
        let beta = beta_source.next(restart);
        for i in 0..n {
            y[i] = x[i] + beta * (x[i] - x_prev[i]);
        }
        inst.residual_into(&y, &mut r);
        inst.matrix().matvec_t(&r, &mut grad);
        for i in 0..n {
            center[i] = y[i] - grad[i] / l;
        }
        prox_weighted_l1_box_into(&center, &s, l, inst.bounds(), &mut x_next)?;
        ensure_finite(&x_next, "iterate", k)?;

        let step_norm = nrm2_diff(&x_next, &x);
        surrogate =
            (2.0 * l * nrm2_diff(&x_next, &y) + rho * step_norm) / termination_scale(&x_next);

        if let Some(mon) = monitor.as_mut() {
            certify_prox(&center, &s, l, &x_next, inst, k)?;
            inst.residual_into(&x_next, &mut r);
            let fval = inst.objective_from_residual(&x_next, &r);
            let potential = fval + 0.5 * l * step_norm * step_norm;
            mon.record(k, potential, nrm2_diff_sq(&x, &x_prev), beta)?;
            if let Some(tr) = trace.as_mut() {
                tr.push(TraceEntry { iteration: k, fval, potential, step_norm, ls_trials: 1 });
            }
        }

        mem::swap(&mut x_prev, &mut x);
        mem::swap(&mut x, &mut x_next);
        mem::swap(&mut y_prev, &mut y);
        iterations = k + 1;
        if surrogate < opts.tol {
            converged = true;
            break;
        }
    }

    if let Some(mon) = monitor.as_ref() {
        mon.finish()?;
    }
    SolveReport::assemble(inst, x, iterations, converged, surrogate, started.elapsed().as_secs_f64(), trace)
}

/// Type-II scheme: momentum through an auxiliary sequence, periodic schedule.
/// The certified point is the auxiliary iterate.
pub fn solve_irl1e2(inst: &ProblemInstance, opts: &SolverOptions) -> Result<SolveReport> {
    let schedule = ThetaScheduleE2::new();
    let (sup, ok) = schedule.validate(200, VALIDATION_DELTA)?;
    if !ok {
        return Err(Error::Numerical(format!("periodic schedule failed its validity condition: sup {sup}")));
    }
    let coefficient = 0.5 * inst.lipschitz() * schedule.min_drop_coefficient();
    run_e2(inst, opts, |k| schedule.theta(k), coefficient)
}

pub(crate) fn run_e2(
    inst: &ProblemInstance,
    opts: &SolverOptions,
    theta: impl Fn(usize) -> f64,
    drop_coefficient: f64,
) -> Result<SolveReport> {
    check_start(inst, opts)?;
    let started = Instant::now();
    let (m, n) = (inst.m(), inst.n());
    let l = inst.lipschitz();
    let rho = inst.penalty().weight_lipschitz();

    let mut x_prev = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z_next = vec![0.0; n];
    let mut x_next = vec![0.0; n];
    let mut center = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut s = Vec::with_capacity(n);
    let mut r = vec![0.0; m];

    let mut monitor = opts.monitor.then(|| DropMonitor::new(drop_coefficient, opts.monitor_slack));
    let mut trace = opts.monitor.then(Vec::new);

    let mut iterations = 0;
    let mut converged = false;
    let mut surrogate = f64::INFINITY;

    for k in 0..opts.max_iter {
        inst.penalty().weights_into(&x, &mut s);
        let th = theta(k);
        let step = l * th;
        for i in 0..n {
            y[i] = (1.0 - th) * x[i] + th * z[i];
        }
        inst.residual_into(&y, &mut r);
        inst.matrix().matvec_t(&r, &mut grad);
        for i in 0..n {
            center[i] = z[i] - grad[i] / step;
        }
        prox_weighted_l1_box_into(&center, &s, step, inst.bounds(), &mut z_next)?;
        ensure_finite(&z_next, "auxiliary iterate", k)?;
        for i in 0..n {
            x_next[i] = (1.0 - th) * x[i] + th * z_next[i];
        }

        // Drop requirement of the certificate at this iteration, taken
        // before the state rotates.
        let drop_term = nrm2_diff_sq(&x_prev, &z);
        surrogate = (l * nrm2_diff(&z_next, &y)
            + rho * nrm2_diff(&x, &z_next)
            + l * nrm2_diff(&x_next, &y))
            / termination_scale(&z_next);

        if let Some(mon) = monitor.as_mut() {
            certify_prox(&center, &s, step, &z_next, inst, k)?;
            inst.residual_into(&x_next, &mut r);
            let fval = inst.objective_from_residual(&x_next, &r);
            let potential = fval + 0.5 * l * nrm2_diff_sq(&x_next, &x);
            mon.record(k, potential, drop_term)?;
            if let Some(tr) = trace.as_mut() {
                tr.push(TraceEntry {
                    iteration: k,
                    fval,
                    potential,
                    step_norm: nrm2_diff(&x_next, &x),
                    ls_trials: 1,
                });
            }
        }

        mem::swap(&mut x_prev, &mut x);
        mem::swap(&mut x, &mut x_next);
        mem::swap(&mut z, &mut z_next);
        iterations = k + 1;
        if surrogate < opts.tol {
            converged = true;
            break;
        }
    }

    SolveReport::assemble(inst, z, iterations, converged, surrogate, started.elapsed().as_secs_f64(), trace)
}

/// Type-III scheme: auxiliary momentum plus a second prox that anchors the
/// x-iterate at the extrapolated point.
pub fn solve_irl1e3(inst: &ProblemInstance, opts: &SolverOptions) -> Result<SolveReport> {
    let schedule = ThetaScheduleE3::new(opts.gamma)?;
    let (sup, ok) = schedule.validate(60, VALIDATION_DELTA)?;
    if !ok {
        return Err(Error::InvalidArgument(format!(
            "saturating schedule fails its validity condition at gamma {}: sup {sup}",
            opts.gamma
        )));
    }
    let coefficient = 0.5 * inst.lipschitz() * schedule.min_drop_coefficient();
    run_e3(inst, opts, |k| schedule.theta(k), coefficient)
}

pub(crate) fn run_e3(
    inst: &ProblemInstance,
    opts: &SolverOptions,
    theta: impl Fn(usize) -> f64,
    drop_coefficient: f64,
) -> Result<SolveReport> {
    check_start(inst, opts)?;
    let started = Instant::now();
    let (m, n) = (inst.m(), inst.n());
    let l = inst.lipschitz();
    let rho = inst.penalty().weight_lipschitz();

    let mut x_prev = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z_next = vec![0.0; n];
    let mut x_next = vec![0.0; n];
    let mut w_next = vec![0.0; n];
    let mut center = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut s = Vec::with_capacity(n);
    let mut r = vec![0.0; m];

    let mut monitor = opts.monitor.then(|| DropMonitor::new(drop_coefficient, opts.monitor_slack));
    let mut trace = opts.monitor.then(Vec::new);

    let mut iterations = 0;
    let mut converged = false;
    let mut surrogate = f64::INFINITY;

    for k in 0..opts.max_iter {
        inst.penalty().weights_into(&x, &mut s);
        let th = theta(k);
        let step_z = l * th;
        for i in 0..n {
            y[i] = (1.0 - th) * x[i] + th * z[i];
        }
        inst.residual_into(&y, &mut r);
        inst.matrix().matvec_t(&r, &mut grad);

        for i in 0..n {
            center[i] = z[i] - grad[i] / step_z;
        }
        prox_weighted_l1_box_into(&center, &s, step_z, inst.bounds(), &mut z_next)?;
        let z_certify = opts.monitor.then(|| (center.clone(), step_z));
        for i in 0..n {
            center[i] = y[i] - grad[i] / l;
        }
        prox_weighted_l1_box_into(&center, &s, l, inst.bounds(), &mut x_next)?;
        ensure_finite(&x_next, "iterate", k)?;
        ensure_finite(&z_next, "auxiliary iterate", k)?;
        for i in 0..n {
            w_next[i] = (1.0 - th) * x[i] + th * z_next[i];
        }

        let drop_term = nrm2_diff_sq(&x_prev, &z) + nrm2_diff_sq(&w, &x);
        let step_norm = nrm2_diff(&x_next, &x);
        surrogate =
            (2.0 * l * nrm2_diff(&x_next, &y) + rho * step_norm) / termination_scale(&x_next);

        if let Some(mon) = monitor.as_mut() {
            certify_prox(&center, &s, l, &x_next, inst, k)?;
            if let Some((z_center, step)) = z_certify {
                certify_prox(&z_center, &s, step, &z_next, inst, k)?;
            }
            inst.residual_into(&x_next, &mut r);
            let fval = inst.objective_from_residual(&x_next, &r);
            let potential =
                fval + 0.5 * l * (nrm2_diff_sq(&w_next, &x) + nrm2_diff_sq(&w_next, &x_next));
            mon.record(k, potential, drop_term)?;
            if let Some(tr) = trace.as_mut() {
                tr.push(TraceEntry { iteration: k, fval, potential, step_norm, ls_trials: 1 });
            }
        }

        mem::swap(&mut x_prev, &mut x);
        mem::swap(&mut x, &mut x_next);
        mem::swap(&mut z, &mut z_next);
        mem::swap(&mut w, &mut w_next);
        iterations = k + 1;
        if surrogate < opts.tol {
            converged = true;
            break;
        }
    }

    SolveReport::assemble(inst, x, iterations, converged, surrogate, started.elapsed().as_secs_f64(), trace)
}
