use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxSpec, NormKind};
use crate::linf::{DecompositionAudit, LinfPlan};
use crate::oracles::{generate_instance, MapFamily};

use super::run::{failure_json, run_solver, ResultRow, SolverKind};

fn default_max_rows() -> usize {
    100_000
}

/// Cross product of instance parameters and solvers to run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub families: Vec<MapFamily>,
    pub ks: Vec<usize>,
    pub eps: Vec<f64>,
    /// `null` entries ask for nonexpansive instances.
    pub gammas: Vec<Option<f64>>,
    pub norm: NormKind,
    pub seeds: Vec<u64>,
    pub solvers: Vec<SolverKind>,
    pub out: PathBuf,
    #[serde(default = "default_max_rows")]
    pub max_rows: usize,
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("families", self.families.len()),
            ("ks", self.ks.len()),
            ("eps", self.eps.len()),
            ("gammas", self.gammas.len()),
            ("seeds", self.seeds.len()),
            ("solvers", self.solvers.len()),
        ];
        for (name, len) in lists {
            if len == 0 {
                return Err(Error::contract(format!("config list `{name}` is empty")));
            }
        }
        let size = lists.iter().map(|(_, n)| *n).product::<usize>();
        if size > self.max_rows {
            return Err(Error::contract(format!(
                "config expands to {size} runs, above max_rows {}",
                self.max_rows
            )));
        }
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let config: BenchmarkConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        config.validate()?;
        Ok(config)
    }
}

/// A parameter combination that was not run, and why.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Skipped {
    pub family: MapFamily,
    pub k: usize,
    pub eps: f64,
    pub gamma: Option<f64>,
    pub seed: u64,
    pub solver: SolverKind,
    pub reason: String,
}

/// A run that ended in an error; its row has `pass = false`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub instance_id: String,
    pub solver: SolverKind,
    pub eps: f64,
    pub error: serde_json::Value,
}

/// Least-squares slope of `log(queries)` against `log(log₂(1/x))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub solver: SolverKind,
    pub k: usize,
    /// `eps_gamma` when `x = eps·γ`, `eps` otherwise.
    pub x_axis: &'static str,
    pub exponent: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Queries of one decomposition run: `q_a` the most any inner solve used,
/// `q_b` the outer solver's queries, `q_ab` the total.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionTriple {
    pub instance_id: String,
    pub eps: f64,
    pub inner_dim: usize,
    pub outer_dim: usize,
    pub q_a: usize,
    pub q_b: usize,
    pub q_ab: usize,
    pub analytic_bound: usize,
    pub pass: bool,
}

impl DecompositionTriple {
    pub fn from_audit(instance_id: String, eps: f64, audit: &DecompositionAudit) -> Self {
        let (a, b) = (audit.inner_dim, audit.outer_dim);
        let analytic_bound = match (LinfPlan::for_dimension(a), LinfPlan::for_dimension(b)) {
            (Ok(pa), Ok(pb)) => pa
                .query_bound(&BoxSpec::unit(a), eps)
                .saturating_mul(pb.query_bound(&BoxSpec::unit(b), eps)),
            _ => usize::MAX,
        };
        let (q_a, q_b, q_ab) = (
            audit.max_inner_queries(),
            audit.outer_queries(),
            audit.total_queries,
        );
        DecompositionTriple {
            instance_id,
            eps,
            inner_dim: a,
            outer_dim: b,
            q_a,
            q_b,
            q_ab,
            analytic_bound,
            pass: q_ab <= q_a.saturating_mul(q_b) && q_ab <= analytic_bound,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BenchSummary {
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub fits: Vec<ExponentFit>,
    pub decompositions: Vec<DecompositionTriple>,
    pub product_bound_violations: usize,
    pub failures: Vec<Failure>,
    pub skipped: Vec<Skipped>,
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub rows: Vec<ResultRow>,
    pub summary: BenchSummary,
}

impl BenchReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

/// Run every combination in `config`. Combinations a generator or solver
/// rejects up front (wrong norm, missing gamma, precision floor, grid size)
/// are listed as skipped; errors during a solve become failed rows.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchReport> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut summary = BenchSummary::default();
    for &family in &config.families {
        for &k in &config.ks {
            for &gamma in &config.gammas {
                for &seed in &config.seeds {
                    for &eps in &config.eps {
                        let skip = |solver, reason: String| Skipped {
                            family,
                            k,
                            eps,
                            gamma,
                            seed,
                            solver,
                            reason,
                        };
                        let instance =
                            match generate_instance(seed, family, k, eps, gamma, config.norm) {
                                Ok(i) => i,
                                Err(e) => {
                                    for &solver in &config.solvers {
                                        summary.skipped.push(skip(solver, e.to_string()));
                                    }
                                    continue;
                                }
                            };
                        for &solver in &config.solvers {
                            match run_solver(&instance, solver, eps) {
                                Ok(out) => {
                                    if let Some(audit) = &out.audit {
                                        summary.decompositions.push(
                                            DecompositionTriple::from_audit(
                                                out.row.instance_id.clone(),
                                                eps,
                                                audit,
                                            ),
                                        );
                                    }
                                    rows.push(out.row);
                                }
                                Err(
                                    e @ (Error::Incompatible(_)
                                    | Error::PrecisionFloor(_)
                                    | Error::ScaleGuard(_)),
                                ) => summary.skipped.push(skip(solver, e.to_string())),
                                Err(e) => {
                                    summary.failures.push(Failure {
                                        instance_id: instance.id(),
                                        solver,
                                        eps,
                                        error: failure_json(&e),
                                    });
                                    rows.push(ResultRow {
                                        instance_id: instance.id(),
                                        solver,
                                        k,
                                        eps,
                                        gamma,
                                        norm: config.norm,
                                        queries: 0,
                                        rounds: 0,
                                        wall_time_s: 0.0,
                                        residual: f64::NAN,
                                        pass: false,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    summary.rows = rows.len();
    summary.passed = rows.iter().filter(|r| r.pass).count();
    summary.failed = summary.rows - summary.passed;
    summary.product_bound_violations = summary.decompositions.iter().filter(|d| !d.pass).count();
    summary.fits = fit_exponents(&rows);
    Ok(BenchReport { rows, summary })
}

/// Per `(solver, k)`: fit over passing rows. Contraction rows of the
/// recursive ℓ1 solver use `x = eps·γ`; all others use `x = eps`.
pub fn fit_exponents(rows: &[ResultRow]) -> Vec<ExponentFit> {
    type Group = (SolverKind, &'static str, Vec<(f64, f64)>);
    let mut groups: BTreeMap<(&'static str, usize), Group> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.pass && r.queries > 0) {
        let (x, axis) = match (row.solver, row.gamma) {
            (SolverKind::L1Recursive, Some(g)) => (row.eps * g, "eps_gamma"),
            _ => (row.eps, "eps"),
        };
        let level = (1.0 / x).log2();
        if level <= 1.0 {
            continue;
        }
        groups
            .entry((row.solver.as_str(), row.k))
            .or_insert((row.solver, axis, Vec::new()))
            .2
            .push((level.ln(), (row.queries as f64).ln()));
    }
    groups
        .into_iter()
        .filter_map(|((_, k), (solver, x_axis, pts))| {
            let (exponent, intercept) = least_squares(&pts)?;
            Some(ExponentFit {
                solver,
                k,
                x_axis,
                exponent,
                intercept,
                points: pts.len(),
            })
        })
        .collect()
}

/// Slope and intercept of the least-squares line through `pts`; `None`
/// when the abscissae do not vary.
pub fn least_squares(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Fixed-column CSV of `rows`.
pub fn write_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub const CSV_COLUMNS: [&str; 11] = [
    "instance_id",
    "solver",
    "k",
    "eps",
    "gamma",
    "norm",
    "queries",
    "rounds",
    "wall_time_s",
    "residual",
    "pass",
];

/// `results.csv` → `results.summary.json`.
pub fn summary_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("summary.json")
}

/// Write the CSV to `config.out` and the summary next to it.
pub fn write_report(report: &BenchReport, csv_path: &Path) -> Result<PathBuf> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_csv(&report.rows, csv_path)?;
    let path = summary_path(csv_path);
    let mut text = serde_json::to_string_pretty(&report.summary)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}
