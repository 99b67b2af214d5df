//! Solver dispatch, re-verified result rows, and scaling benchmarks.

mod bench;
mod run;

pub use bench::{
    fit_exponents, least_squares, run_benchmark, summary_path, write_csv, write_report,
    BenchReport, BenchSummary, BenchmarkConfig, DecompositionTriple, ExponentFit, Failure, Skipped,
    CSV_COLUMNS,
};
pub use run::{failure_json, run_solver, ResultRow, RunOutcome, SolverKind};
