use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, NormKind, Point, SLACK};
use crate::l1::{solve_l1_contraction, solve_l1_nonexp};
use crate::linf::{solve_linf_top, DecompositionAudit};
use crate::oracles::InstanceFile;
use crate::verify::{banach_iterate, grid_search_fixed_point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    LinfDecomp,
    L1Recursive,
    Banach,
    Grid,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::LinfDecomp,
        SolverKind::L1Recursive,
        SolverKind::Banach,
        SolverKind::Grid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::LinfDecomp => "linf-decomp",
            SolverKind::L1Recursive => "l1-recursive",
            SolverKind::Banach => "banach",
            SolverKind::Grid => "grid",
        }
    }

    /// Whether this solver applies to `instance` at all.
    pub fn check_compatible(self, instance: &InstanceFile) -> Result<()> {
        let p = &instance.problem;
        match self {
            SolverKind::LinfDecomp if p.norm != NormKind::LInf => Err(Error::Incompatible(
                format!("linf-decomp needs an linf instance, got {}", p.norm),
            )),
            SolverKind::L1Recursive if p.norm != NormKind::L1 => Err(Error::Incompatible(format!(
                "l1-recursive needs an l1 instance, got {}",
                p.norm
            ))),
            SolverKind::Banach if p.gamma.is_none() => Err(Error::Incompatible(
                "banach needs a contraction (gamma) instance".into(),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::contract(format!("unknown solver `{s}`")))
    }
}

/// One solve, as written to the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance_id: String,
    pub solver: SolverKind,
    pub k: usize,
    pub eps: f64,
    pub gamma: Option<f64>,
    pub norm: NormKind,
    pub queries: usize,
    pub rounds: usize,
    pub wall_time_s: f64,
    pub residual: f64,
    pub pass: bool,
}

/// A finished solve: the table row plus what the row cannot hold.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub row: ResultRow,
    pub point: Point,
    pub audit: Option<DecompositionAudit>,
}

/// Solve `instance` at precision `eps` and re-check the answer with a fresh
/// evaluation of the instance's map.
pub fn run_solver(instance: &InstanceFile, solver: SolverKind, eps: f64) -> Result<RunOutcome> {
    solver.check_compatible(instance)?;
    let p = &instance.problem;
    let map = &instance.map;
    let clock = Instant::now();
    let (point, queries, rounds, audit) = match solver {
        SolverKind::LinfDecomp => {
            let out = solve_linf_top(map, eps)?;
            let s = out.solution.stats;
            (out.solution.point, s.queries, s.rounds, out.audit)
        }
        SolverKind::L1Recursive => {
            let out = match p.gamma {
                Some(g) => solve_l1_contraction(map, eps, g)?,
                None => solve_l1_nonexp(map, eps)?,
            };
            let s = out.solution.stats;
            (out.solution.point, s.queries, s.rounds, None)
        }
        SolverKind::Banach => {
            let gamma = p.gamma.expect("checked above");
            let sol = banach_iterate(map, eps, gamma, Point::splat(0.0, p.k), p.norm)?;
            (sol.point, sol.stats.queries, sol.stats.rounds, None)
        }
        SolverKind::Grid => {
            let g = grid_search_fixed_point(map, eps, p.norm)?;
            (g.point, g.evaluations, g.evaluations, None)
        }
    };
    let wall_time_s = clock.elapsed().as_secs_f64();

    let fresh = instance.map.clone();
    let residual = distance(&fresh.evaluate_map(&point)?, &point, p.norm);
    Ok(RunOutcome {
        row: ResultRow {
            instance_id: instance.id(),
            solver,
            k: p.k,
            eps,
            gamma: p.gamma,
            norm: p.norm,
            queries,
            rounds,
            wall_time_s,
            residual,
            pass: residual <= eps + SLACK,
        },
        point,
        audit,
    })
}

/// Machine-readable description of a failed solve.
pub fn failure_json(error: &Error) -> serde_json::Value {
    let kind = match error {
        Error::ContractViolation(_) => "contract_violation",
        Error::OracleContractViolation(_) => "oracle_contract_violation",
        Error::InvariantBreach(_) => "invariant_breach",
        Error::CaseAnalysisExhausted { .. } => "case_analysis_exhausted",
        Error::PrecisionFloor(_) => "precision_floor",
        Error::ScaleGuard(_) => "scale_guard",
        Error::Incompatible(_) => "incompatible",
        Error::Violation(_) => "violation",
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => "io",
    };
    let mut value = serde_json::json!({ "error": kind, "message": error.to_string() });
    if let Error::Violation(report) = error {
        value["report"] = serde_json::to_value(report.as_ref()).expect("reports serialize");
    }
    value
}
