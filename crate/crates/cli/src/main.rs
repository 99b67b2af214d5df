use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fixpoint_core::harness::{
    failure_json, run_benchmark, run_solver, write_report, BenchmarkConfig, SolverKind,
};
use fixpoint_core::verify::{check_nonexpansive_pairs, grid_search_fixed_point};
use fixpoint_core::{generate_instance, Error, InstanceFile, MapFamily, NormKind, SLACK};
use serde_json::json;

const EXIT_PASS: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_FAIL: u8 = 2;
const EXIT_BREACH: u8 = 3;

/// Approximate fixed points of contraction and nonexpansive maps.
#[derive(Parser, Debug)]
#[command(name = "fixpoint", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write seeded instance files.
    Gen(GenArgs),
    /// Solve one instance and print its result row as JSON.
    Solve(SolveArgs),
    /// Run a benchmark described by a JSON config.
    Bench(BenchArgs),
    /// Sample point pairs to falsify an instance's Lipschitz certificate.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    family: MapFamily,
    #[arg(long)]
    k: usize,
    /// Contraction margin; omit for a nonexpansive instance.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value = "l1")]
    norm: NormKind,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of instances, with consecutive seeds.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long)]
    solver: SolverKind,
    /// Defaults to the instance's eps.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    instance: PathBuf,
    /// Number of sampled pairs.
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run the exhaustive grid search at this precision.
    #[arg(long)]
    eps: Option<f64>,
}

/// Exit code for an error raised while solving.
fn error_code(e: &Error) -> u8 {
    if e.is_invariant_failure() || matches!(e, Error::OracleContractViolation(_)) {
        EXIT_BREACH
    } else {
        EXIT_USAGE
    }
}

fn fail(e: &Error) -> u8 {
    eprintln!("error: {e}");
    let code = error_code(e);
    if code == EXIT_BREACH {
        let _ = emit(failure_json(e));
    }
    code
}

/// Print one line to stdout; a closed pipe is not an error.
fn emit(line: impl std::fmt::Display) -> Result<(), Error> {
    match writeln!(io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Error> {
    emit(serde_json::to_string_pretty(value)?)
}

fn gen(args: &GenArgs) -> Result<u8, Error> {
    fs::create_dir_all(&args.out)?;
    for seed in args.seed..args.seed.saturating_add(args.count) {
        let inst = generate_instance(seed, args.family, args.k, args.eps, args.gamma, args.norm)?;
        let path = args.out.join(format!("{}.json", inst.id()));
        inst.write(&path)?;
        emit(path.display())?;
    }
    Ok(EXIT_PASS)
}

fn solve(args: &SolveArgs) -> Result<u8, Error> {
    let inst = InstanceFile::read(&args.instance)?;
    let eps = args.eps.unwrap_or(inst.problem.eps);
    let out = run_solver(&inst, args.solver, eps)?;
    print_json(&out.row)?;
    Ok(if out.row.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn bench(args: &BenchArgs) -> Result<u8, Error> {
    let mut config = BenchmarkConfig::read(&args.config)?;
    if let Some(out) = &args.out {
        config.out = out.clone();
    }
    let report = run_benchmark(&config)?;
    let summary = write_report(&report, &config.out)?;
    let s = &report.summary;
    emit(format_args!(
        "{} rows, {} passed, {} failed, {} skipped",
        s.rows,
        s.passed,
        s.failed,
        s.skipped.len()
    ))?;
    for fit in &s.fits {
        emit(format_args!(
            "{} k={}: exponent {:.3} against log2(1/{}) over {} rows",
            fit.solver, fit.k, fit.exponent, fit.x_axis, fit.points
        ))?;
    }
    emit(format_args!(
        "wrote {} and {}",
        config.out.display(),
        summary.display()
    ))?;
    Ok(if report.all_passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

fn verify(args: &VerifyArgs) -> Result<u8, Error> {
    let inst = InstanceFile::read(&args.instance)?;
    let p = &inst.problem;
    let required = p.gamma.map_or(1.0, |g| 1.0 - g);
    let report = check_nonexpansive_pairs(&inst.map, args.count, p.norm, required, args.seed)?;
    let mut out = json!({
        "instance_id": inst.id(),
        "pairs": args.count,
        "required_lipschitz": required,
        "pass": report.is_none(),
        "report": report,
    });
    let mut code = if report.is_none() {
        EXIT_PASS
    } else {
        EXIT_BREACH
    };
    if let Some(eps) = args.eps {
        let g = grid_search_fixed_point(&inst.map, eps, p.norm)?;
        let pass = g.residual <= eps + SLACK;
        out["grid"] = json!({
            "eps": eps,
            "point": g.point,
            "residual": g.residual,
            "evaluations": g.evaluations,
            "pass": pass,
        });
        if !pass && code == EXIT_PASS {
            code = EXIT_FAIL;
        }
    }
    print_json(&out)?;
    Ok(code)
}

fn run(cli: &Cli) -> Result<u8, Error> {
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Verify(a) => verify(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = run(&cli).unwrap_or_else(|e| fail(&e));
    ExitCode::from(code)
}
