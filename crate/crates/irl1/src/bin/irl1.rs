//! Command-line interface: single solves, benchmark sweeps, table rendering
//! and schedule validation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use irl1::bench::{
    aggregate, desk_scale_sizes, effective_threads, paper_scale_sizes, read_csv, render_table,
    run_plan, write_csv, BenchmarkPlan, SingleRun,
};
use irl1::schedules::{ThetaScheduleE2, ThetaScheduleE3, VALIDATION_DELTA};
use irl1::SolverKind;

#[derive(Parser)]
#[command(name = "irl1", version, about = "Reweighted l1 solvers and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one random log-penalty instance and print the report.
    Solve(SolveArgs),
    /// Run a benchmark sweep and write rows as CSV.
    Bench(BenchArgs),
    /// Render aggregated means from a benchmark CSV.
    Table(TableArgs),
    /// Check the momentum schedule validity conditions; exits nonzero on
    /// failure.
    ValidateSchedules(ValidateArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    solver: SolverKind,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 5e-4)]
    lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Uniform box bounds as LO,HI.
    #[arg(long, value_parser = parse_pair)]
    r#box: Option<(f64, f64)>,
    /// Record the per-iteration trace and assert decrease certificates.
    #[arg(long)]
    monitor: bool,
    /// Write the terminal iterate, one value per line.
    #[arg(long)]
    dump_x: Option<PathBuf>,
    /// Append the outcome as a single-row CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Sizes as MxN[,MxN...]; defaults to the desk-scale grid.
    #[arg(long, value_parser = parse_sizes)]
    sizes: Option<std::vec::Vec<(usize, usize)>>,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value_t = 5e-4)]
    lambda: f64,
    /// Comma-separated list of penalty smoothing values.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5])]
    epsilon: Vec<f64>,
    /// Comma-separated subset of solvers, or "all".
    #[arg(long, default_value = "all", value_parser = parse_solvers)]
    solvers: std::vec::Vec<SolverKind>,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Use the full ten-point benchmark grid instead of the desk grid.
    #[arg(long)]
    paper_scale: bool,
    /// Worker threads; 0 means one per core. IRL1_THREADS overrides.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Memory budget for worker-resident instances, in GiB.
    #[arg(long, default_value_t = 8.0)]
    memory_budget_gb: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Check horizon for the periodic schedule (the saturating schedule is
    /// always checked to 60).
    #[arg(long, default_value_t = 200)]
    horizon: usize,
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected LO,HI".into());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| format!("bad real: {}", parts[0]))?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| format!("bad real: {}", parts[1]))?;
    Ok((lo, hi))
}

fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>, String> {
    s.split(',')
        .map(|tok| {
            let dims: Vec<&str> = tok.trim().split(['x', 'X']).collect();
            if dims.len() != 2 {
                return Err(format!("bad size (expected MxN): {tok}"));
            }
            let m = dims[0].trim().parse().map_err(|_| format!("bad m: {}", dims[0]))?;
            let n = dims[1].trim().parse().map_err(|_| format!("bad n: {}", dims[1]))?;
            Ok((m, n))
        })
        .collect()
}

fn parse_solvers(s: &str) -> Result<Vec<SolverKind>, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(SolverKind::ALL.to_vec());
    }
    s.split(',').map(|tok| tok.parse::<SolverKind>().map_err(|e| e.to_string())).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Solve(args) => {
            let run = SingleRun {
                m: args.m,
                n: args.n,
                seed: args.seed,
                lambda: args.lambda,
                epsilon: args.epsilon,
                solver: args.solver,
                tol: args.tol,
                max_iter: args.max_iter,
                monitor: args.monitor,
                uniform_box: args.r#box,
            };
            let (row, report) = run.execute()?;
            println!(
                "solver {} on {}x{} (seed {}): fval {:.9e}, iterations {}, residual {:.3e}, \
                 surrogate {:.3e}, converged {}, t0 {:.3}s, solve {:.3}s",
                row.solver,
                row.m,
                row.n,
                row.seed,
                row.fval,
                row.iterations,
                row.residual,
                report.surrogate_residual,
                row.converged,
                row.t0_seconds,
                row.solve_seconds
            );
            if let Some(path) = args.dump_x {
                let mut f = BufWriter::new(File::create(path)?);
                for v in &report.x_final {
                    writeln!(f, "{v:.16e}")?;
                }
            }
            if let Some(path) = args.out {
                let mut f = BufWriter::new(File::create(path)?);
                write_csv(&mut f, std::slice::from_ref(&row))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench(args) => {
            let sizes = match (args.paper_scale, args.sizes) {
                (true, _) => paper_scale_sizes(),
                (false, Some(sizes)) => sizes,
                (false, None) => desk_scale_sizes(),
            };
            let plan = BenchmarkPlan {
                sizes,
                seeds: args.seeds,
                lambda: args.lambda,
                epsilons: args.epsilon,
                solvers: args.solvers,
                tol: args.tol,
                max_iter: args.max_iter,
                threads: args.threads,
                memory_budget_bytes: (args.memory_budget_gb * (1u64 << 30) as f64) as u64,
                scale_note: if args.paper_scale {
                    "full benchmark grid (m,n) = (720i, 2560i)".into()
                } else {
                    "desk scale".into()
                },
            };
            eprintln!(
                "running {} sizes x {} epsilons x {} seeds x {} solvers on {} threads",
                plan.sizes.len(),
                plan.epsilons.len(),
                plan.seeds,
                plan.solvers.len(),
                effective_threads(plan.threads)
            );
            let rows = run_plan(&plan)?;
            let mut f = BufWriter::new(File::create(&args.out)?);
            write_csv(&mut f, &rows)?;
            f.flush()?;
            eprintln!("wrote {} rows to {}", rows.len(), args.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Table(args) => {
            let mut f = File::open(&args.input)?;
            let rows = read_csv(&mut f)?;
            let agg = aggregate(&rows)?;
            print!("{}", render_table(&agg));
            Ok(ExitCode::SUCCESS)
        }
        Command::ValidateSchedules(args) => {
            let e2 = ThetaScheduleE2::new();
            let (sup2, ok2) = e2.validate(args.horizon.max(2), VALIDATION_DELTA)?;
            println!(
                "periodic schedule condition over k = 1..{}: sup {sup2:.6e} ({})",
                args.horizon.max(2),
                if ok2 { "ok" } else { "VIOLATED" }
            );
            let e3 = ThetaScheduleE3::new(args.gamma)?;
            let (sup3, ok3) = e3.validate(60, VALIDATION_DELTA)?;
            println!(
                "saturating schedule condition at gamma {} over k = 1..60: sup {sup3:.6e} ({})",
                args.gamma,
                if ok3 { "ok" } else { "VIOLATED" }
            );
            if ok2 && ok3 {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
    }
}
