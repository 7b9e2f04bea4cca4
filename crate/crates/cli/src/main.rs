use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::LevelFilter;

use nsconic::hsd::Status;
use nsconic::io;
use nsconic::solver::{solve, Mode, SolveResult, SolverConfig, Termination};
use nsconic::verifier::{audit_trace, LemmaVerdict};
use nsconic::{acceptance, Error};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_UNSOLVED: u8 = 2;
const EXIT_VERDICT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nsconic",
    version,
    about = "Interior-point solver for nonsymmetric conic programs"
)]
struct Cli {
    /// More log output on standard error (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Theoretical,
    Adaptive,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Theoretical)]
        mode: ModeArg,
        #[arg(long = "max-iters")]
        max_iters: Option<usize>,
        /// Write the iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Audit every iteration; any failing verdict gives exit code 3.
        #[arg(long)]
        verify: bool,
        /// Write the solution as JSON.
        #[arg(long = "json-out")]
        json_out: Option<PathBuf>,
    },
    /// Re-check a trace file written by `solve --trace`.
    Verify { trace: PathBuf },
    /// Run the acceptance suite.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        2 => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).init();
    ExitCode::from(match cli.command {
        Command::Solve {
            file,
            epsilon,
            mode,
            max_iters,
            trace,
            verify,
            json_out,
        } => {
            let config = SolverConfig {
                mode: match mode {
                    ModeArg::Theoretical => Mode::Theoretical,
                    ModeArg::Adaptive => Mode::Adaptive,
                },
                epsilon,
                max_iterations: max_iters,
                verify,
                ..SolverConfig::default()
            };
            run_solve(&file, &config, trace.as_deref(), json_out.as_deref())
        }
        Command::Verify { trace } => run_verify(&trace),
        Command::Selftest => run_selftest(),
    })
}

fn run_solve(
    file: &Path,
    config: &SolverConfig,
    trace: Option<&Path>,
    json_out: Option<&Path>,
) -> u8 {
    let problem = match io::parse_problem(file) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let (result, limit_hit) = match solve(&problem, config) {
        Ok(r) => (r, false),
        Err(Error::MaxIterationsExceeded { partial, limit }) => {
            eprintln!("iteration limit of {limit} reached");
            (*partial, true)
        }
        Err(e @ (Error::InvalidConfig(_) | Error::Io(_))) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
        Err(e) => {
            eprintln!("solver stopped: {e}");
            return EXIT_UNSOLVED;
        }
    };
    print_summary(&result);
    if let Some(path) = trace {
        if let Err(e) = io::write_trace(path, &result.trace) {
            eprintln!("error: cannot write trace: {e}");
            return EXIT_INPUT;
        }
    }
    if let Some(path) = json_out {
        if let Err(e) = io::write_solution(path, &result) {
            eprintln!("error: cannot write solution: {e}");
            return EXIT_INPUT;
        }
    }
    if config.verify && result.verdict_failures() > 0 {
        for (iter, v) in &result.verdicts.first_failures {
            eprintln!("iteration {iter}: {}", describe(v));
        }
        for v in result.fixed_parameter_checks.iter().filter(|v| v.failed()) {
            eprintln!("fixed parameters: {}", describe(v));
        }
        return EXIT_VERDICT;
    }
    if limit_hit {
        return EXIT_UNSOLVED;
    }
    exit_code_for(&result)
}

/// Solved or certified infeasible; in theoretical mode reaching the target
/// is itself the outcome, whatever the classification at that accuracy.
fn exit_code_for(r: &SolveResult) -> u8 {
    let classified = matches!(
        r.status,
        Status::Optimal | Status::PrimalInfeasible | Status::DualInfeasible
    );
    let target = r.mode == Mode::Theoretical && r.termination == Termination::TargetReached;
    if classified || target {
        EXIT_OK
    } else {
        EXIT_UNSOLVED
    }
}

fn print_summary(r: &SolveResult) {
    println!("status:        {:?}", r.status);
    println!("termination:   {:?}", r.termination);
    println!("iterations:    {}", r.iterations);
    println!("mu_e:          {:e}", r.mu_e);
    match r.status {
        Status::Optimal => {
            println!("primal obj:    {}", r.primal_objective);
            println!("dual obj:      {}", r.dual_objective);
            println!(
                "residuals:     primal {:e}, dual {:e}",
                r.primal_residual, r.dual_residual
            );
        }
        Status::PrimalInfeasible => {
            println!(
                "certificate:   b'y = {}, |A'y + s| = {:e}",
                r.dual_objective, r.dual_residual
            )
        }
        Status::DualInfeasible => {
            println!(
                "certificate:   c'x = {}, |Ax| = {:e}",
                r.primal_objective, r.primal_residual
            )
        }
        Status::Unknown => {}
    }
    if !r.trace.is_empty() && r.trace.iter().any(|t| t.audit.is_some()) {
        println!(
            "verdicts:      {} applicable, {} failed",
            r.verdicts.applicable
                + r.fixed_parameter_checks
                    .iter()
                    .filter(|v| v.applicable)
                    .count(),
            r.verdict_failures()
        );
    }
}

fn describe(v: &LemmaVerdict) -> String {
    format!(
        "{} failed: {:e} vs {:e} (slack {:e})",
        v.id, v.lhs, v.rhs, v.slack
    )
}

fn run_verify(path: &Path) -> u8 {
    let records = match io::read_trace(path) {
        Ok(r) => r,
        Err(Error::Io(e)) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_INPUT;
        }
        Err(e) => {
            eprintln!("corrupted trace {}: {e}", path.display());
            return EXIT_VERDICT;
        }
    };
    let verdicts = audit_trace(&records);
    let mut failed = 0;
    for v in &verdicts {
        let state = if !v.applicable {
            "n/a "
        } else if v.pass {
            "pass"
        } else if v.failed() {
            failed += 1;
            "FAIL"
        } else {
            "info"
        };
        println!("{state} {:<28} {:e} <= {:e}", v.id, v.lhs, v.rhs);
    }
    println!(
        "{} rows, {} checks, {failed} failed",
        records.len(),
        verdicts.len()
    );
    if failed > 0 {
        EXIT_VERDICT
    } else {
        EXIT_OK
    }
}

fn run_selftest() -> u8 {
    let reports = acceptance::run_all();
    for r in &reports {
        println!("{r}");
    }
    if reports.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_VERDICT
    }
}
