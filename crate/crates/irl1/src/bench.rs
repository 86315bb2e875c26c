//! Benchmark harness: instance sweeps over sizes, noise realizations and
//! penalty smoothing values, with CSV emission and aggregation.
//!
//! Each (size, epsilon, seed) triple generates one instance shared by every
//! requested solver, so per-row comparisons see identical data. Workers own
//! their instances; row content is deterministic given the plan, and rows
//! are sorted before emission so only the timing columns vary across runs.

use std::io::{BufRead, BufReader, Read, Write};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::error::{Error, Result};
use crate::penalty::Penalty;
use crate::problem::{generate_instance, InstanceRecipe};
use crate::prox::BoxConstraint;
use crate::solvers::{solve, SolveReport, SolverKind, SolverOptions};

/// One (instance, solver) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub m: usize,
    pub n: usize,
    pub solver: SolverKind,
    pub seed: u64,
    pub lambda: f64,
    pub epsilon: f64,
    /// Step-constant estimation time, recorded once per instance and
    /// repeated on each of its rows.
    pub t0_seconds: f64,
    pub solve_seconds: f64,
    pub iterations: usize,
    pub fval: f64,
    pub residual: f64,
    pub converged: bool,
}

/// Sweep description. The default is a four-point desk-scale grid, a quarter
/// of the full benchmark sizes, which completes in minutes; the full grid is
/// available through [`paper_scale_sizes`].
#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    pub sizes: Vec<(usize, usize)>,
    /// Number of random instances per (size, epsilon) cell; seeds run 0..count.
    pub seeds: u64,
    pub lambda: f64,
    pub epsilons: Vec<f64>,
    pub solvers: Vec<SolverKind>,
    pub tol: f64,
    pub max_iter: usize,
    /// Worker count; zero means one per available core. The `IRL1_THREADS`
    /// environment variable overrides this.
    pub threads: usize,
    pub memory_budget_bytes: u64,
    /// Free-text provenance note carried into the rendered table header.
    pub scale_note: String,
}

impl Default for BenchmarkPlan {
    fn default() -> Self {
        BenchmarkPlan {
            sizes: desk_scale_sizes(),
            seeds: 20,
            lambda: 5e-4,
            epsilons: vec![0.1, 0.5],
            solvers: SolverKind::ALL.to_vec(),
            tol: 1e-4,
            max_iter: 1_000_000,
            threads: 0,
            memory_budget_bytes: 8 << 30,
            scale_note: "desk scale (m,n) = (180i, 640i), i = 1..4".into(),
        }
    }
}

/// Four-point desk-scale grid `(180i, 640i)`.
pub fn desk_scale_sizes() -> Vec<(usize, usize)> {
    (1..=4).map(|i| (180 * i, 640 * i)).collect()
}

/// The full ten-point grid `(720i, 2560i)`.
pub fn paper_scale_sizes() -> Vec<(usize, usize)> {
    (1..=10).map(|i| (720 * i, 2560 * i)).collect()
}

/// Resolves the worker count: environment override, then the plan value,
/// then one per available core.
pub fn effective_threads(requested: usize) -> usize {
    if let Ok(val) = std::env::var("IRL1_THREADS") {
        if let Ok(parsed) = val.trim().parse::<usize>() {
            if parsed > 0 {
                return parsed;
            }
        }
    }
    if requested > 0 {
        return requested;
    }
    thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
}

impl BenchmarkPlan {
    fn validate(&self, threads: usize) -> Result<()> {
        if self.sizes.is_empty() || self.epsilons.is_empty() || self.solvers.is_empty() {
            return Err(Error::InvalidArgument("plan needs sizes, epsilons and solvers".into()));
        }
        if self.seeds == 0 {
            return Err(Error::InvalidArgument("plan needs at least one seed".into()));
        }
        if !(self.lambda > 0.0) || self.epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::InvalidArgument("lambda and epsilons must be positive".into()));
        }
        let largest = self.sizes.iter().map(|&(m, n)| m as u64 * n as u64).max().unwrap_or(0);
        let required = largest.saturating_mul(8).saturating_mul(threads as u64);
        if required > self.memory_budget_bytes {
            return Err(Error::MemoryBudget {
                required_bytes: required,
                budget_bytes: self.memory_budget_bytes,
            });
        }
        Ok(())
    }
}

struct InstanceJob {
    m: usize,
    n: usize,
    epsilon: f64,
    seed: u64,
}

/// Runs the whole plan and returns one row per (instance, solver), sorted by
/// (m, n, epsilon, solver, seed). Solver-level numerical failures become
/// unconverged rows with NaN objective; instance-level failures abort.
pub fn run_plan(plan: &BenchmarkPlan) -> Result<Vec<BenchmarkRow>> {
    let threads = effective_threads(plan.threads);
    plan.validate(threads)?;

    let mut jobs = Vec::new();
    for &(m, n) in &plan.sizes {
        for &epsilon in &plan.epsilons {
            for seed in 0..plan.seeds {
                jobs.push(InstanceJob { m, n, epsilon, seed });
            }
        }
    }

    let counter = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let rows: Mutex<Vec<BenchmarkRow>> = Mutex::new(Vec::with_capacity(jobs.len() * plan.solvers.len()));
    let first_error: Mutex<Option<Error>> = Mutex::new(None);

    thread::scope(|scope| {
        for _ in 0..threads.min(jobs.len()).max(1) {
            scope.spawn(|| loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let idx = counter.fetch_add(1, Ordering::Relaxed);
                if idx >= jobs.len() {
                    break;
                }
                match run_instance_job(plan, &jobs[idx]) {
                    Ok(mut batch) => rows.lock().unwrap().append(&mut batch),
                    Err(e) => {
                        failed.store(true, Ordering::Relaxed);
                        let mut slot = first_error.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(e);
                        }
                        break;
                    }
                }
            });
        }
    });

    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let mut rows = rows.into_inner().unwrap();
    sort_rows(&mut rows);
    Ok(rows)
}

fn sort_rows(rows: &mut [BenchmarkRow]) {
    rows.sort_by(|a, b| {
        (a.m, a.n)
            .cmp(&(b.m, b.n))
            .then(a.epsilon.total_cmp(&b.epsilon))
            .then(a.solver.name().cmp(b.solver.name()))
            .then(a.seed.cmp(&b.seed))
    });
}

fn run_instance_job(plan: &BenchmarkPlan, job: &InstanceJob) -> Result<Vec<BenchmarkRow>> {
    let recipe = InstanceRecipe::new(job.m, job.n, job.seed);
    let penalty = Penalty::log(plan.lambda, job.epsilon)?;
    let instance = generate_instance(&recipe, penalty, BoxConstraint::unbounded(job.n))?;
    let opts = SolverOptions { tol: plan.tol, max_iter: plan.max_iter, ..SolverOptions::default() };

    let mut rows = Vec::with_capacity(plan.solvers.len());
    for &solver in &plan.solvers {
        let row = match solve(&instance, solver, &opts) {
            Ok(report) => row_from_report(plan, job, solver, &instance.lipschitz_seconds(), &report),
            Err(_) => BenchmarkRow {
                m: job.m,
                n: job.n,
                solver,
                seed: job.seed,
                lambda: plan.lambda,
                epsilon: job.epsilon,
                t0_seconds: instance.lipschitz_seconds(),
                solve_seconds: 0.0,
                iterations: 0,
                fval: f64::NAN,
                residual: f64::NAN,
                converged: false,
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

fn row_from_report(
    plan: &BenchmarkPlan,
    job: &InstanceJob,
    solver: SolverKind,
    t0: &f64,
    report: &SolveReport,
) -> BenchmarkRow {
    BenchmarkRow {
        m: job.m,
        n: job.n,
        solver,
        seed: job.seed,
        lambda: plan.lambda,
        epsilon: job.epsilon,
        t0_seconds: *t0,
        solve_seconds: report.wall_seconds,
        iterations: report.iterations,
        fval: report.fval,
        residual: report.residual,
        converged: report.converged,
    }
}

/// Parameters of one standalone solve, mirroring the CLI `solve` command.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub lambda: f64,
    pub epsilon: f64,
    pub solver: SolverKind,
    pub tol: f64,
    pub max_iter: usize,
    pub monitor: bool,
    /// Uniform box `[lo, hi]^n`; `None` leaves the problem unconstrained.
    pub uniform_box: Option<(f64, f64)>,
}

impl SingleRun {
    pub fn execute(&self) -> Result<(BenchmarkRow, SolveReport)> {
        let recipe = InstanceRecipe::new(self.m, self.n, self.seed);
        let penalty = Penalty::log(self.lambda, self.epsilon)?;
        let bounds = match self.uniform_box {
            Some((lo, hi)) => BoxConstraint::uniform(self.n, lo, hi)?,
            None => BoxConstraint::unbounded(self.n),
        };
        let instance = generate_instance(&recipe, penalty, bounds)?;
        let opts = SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            monitor: self.monitor,
            ..SolverOptions::default()
        };
        let report = solve(&instance, self.solver, &opts)?;
        let row = BenchmarkRow {
            m: self.m,
            n: self.n,
            solver: self.solver,
            seed: self.seed,
            lambda: self.lambda,
            epsilon: self.epsilon,
            t0_seconds: instance.lipschitz_seconds(),
            solve_seconds: report.wall_seconds,
            iterations: report.iterations,
            fval: report.fval,
            residual: report.residual,
            converged: report.converged,
        };
        Ok((row, report))
    }
}

pub const CSV_HEADER: &str =
    "m,n,solver,seed,lambda,epsilon,t0_seconds,solve_seconds,iterations,fval,residual,converged";

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes rows with the fixed header; reals carry 17 significant digits.
pub fn write_csv<W: Write>(w: &mut W, rows: &[BenchmarkRow]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.m,
            r.n,
            r.solver,
            r.seed,
            fmt_real(r.lambda),
            fmt_real(r.epsilon),
            fmt_real(r.t0_seconds),
            fmt_real(r.solve_seconds),
            r.iterations,
            fmt_real(r.fval),
            fmt_real(r.residual),
            r.converged,
        )?;
    }
    Ok(())
}

/// Parses a file produced by [`write_csv`].
pub fn read_csv<R: Read>(r: &mut R) -> Result<Vec<BenchmarkRow>> {
    let reader = BufReader::new(r);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty csv".into()))??;
    if header.trim() != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected csv header: {header}")));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::Parse(format!("line {}: expected 12 fields", lineno + 2)));
        }
        let parse_usize = |s: &str| -> Result<usize> {
            s.trim().parse().map_err(|_| Error::Parse(format!("bad integer: {s}")))
        };
        let parse_f64 = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Parse(format!("bad real: {s}")))
        };
        rows.push(BenchmarkRow {
            m: parse_usize(fields[0])?,
            n: parse_usize(fields[1])?,
            solver: fields[2].parse()?,
            seed: fields[3].trim().parse().map_err(|_| Error::Parse(format!("bad seed: {}", fields[3])))?,
            lambda: parse_f64(fields[4])?,
            epsilon: parse_f64(fields[5])?,
            t0_seconds: parse_f64(fields[6])?,
            solve_seconds: parse_f64(fields[7])?,
            iterations: parse_usize(fields[8])?,
            fval: parse_f64(fields[9])?,
            residual: parse_f64(fields[10])?,
            converged: match fields[11].trim() {
                "true" => true,
                "false" => false,
                other => return Err(Error::Parse(format!("bad bool: {other}"))),
            },
        });
    }
    Ok(rows)
}

/// Per-(size, epsilon, solver) arithmetic means.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub m: usize,
    pub n: usize,
    pub epsilon: f64,
    pub solver: SolverKind,
    pub lambda: f64,
    pub count: usize,
    pub converged_count: usize,
    pub mean_t0_seconds: f64,
    pub mean_solve_seconds: f64,
    pub mean_iterations: f64,
    pub mean_fval: f64,
    pub mean_residual: f64,
}

/// Groups rows by (m, n, epsilon, solver) and averages. Rows of one group
/// must share their lambda; output order is the group key order.
pub fn aggregate(rows: &[BenchmarkRow]) -> Result<Vec<AggregateRow>> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to aggregate".into()));
    }
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(usize, usize, u64, &'static str), Vec<&BenchmarkRow>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.m, row.n, row.epsilon.to_bits(), row.solver.name()))
            .or_default()
            .push(row);
    }
    let mut out = Vec::with_capacity(groups.len());
    for ((m, n, eps_bits, _), members) in groups {
        let lambda = members[0].lambda;
        if members.iter().any(|r| r.lambda != lambda) {
            return Err(Error::InvalidArgument(format!(
                "group ({m}, {n}, eps {}) mixes lambda values",
                f64::from_bits(eps_bits)
            )));
        }
        let count = members.len() as f64;
        let mean = |f: &dyn Fn(&BenchmarkRow) -> f64| members.iter().map(|r| f(r)).sum::<f64>() / count;
        out.push(AggregateRow {
            m,
            n,
            epsilon: f64::from_bits(eps_bits),
            solver: members[0].solver,
            lambda,
            count: members.len(),
            converged_count: members.iter().filter(|r| r.converged).count(),
            mean_t0_seconds: mean(&|r| r.t0_seconds),
            mean_solve_seconds: mean(&|r| r.solve_seconds),
            mean_iterations: mean(&|r| r.iterations as f64),
            mean_fval: mean(&|r| r.fval),
            mean_residual: mean(&|r| r.residual),
        });
    }
    Ok(out)
}

/// Fixed-width text rendering of aggregated means.
pub fn render_table(aggregates: &[AggregateRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>6} {:>6} {:>8} {:>8} {:>5} {:>5} {:>10} {:>10} {:>10} {:>13} {:>11}\n",
        "m", "n", "eps", "solver", "runs", "conv", "t0[s]", "time[s]", "iters", "fval", "residual"
    ));
    for a in aggregates {
        out.push_str(&format!(
            "{:>6} {:>6} {:>8} {:>8} {:>5} {:>5} {:>10.4} {:>10.4} {:>10.1} {:>13.6e} {:>11.3e}\n",
            a.m,
            a.n,
            a.epsilon,
            a.solver,
            a.count,
            a.converged_count,
            a.mean_t0_seconds,
            a.mean_solve_seconds,
            a.mean_iterations,
            a.mean_fval,
            a.mean_residual
        ));
    }
    out
}
