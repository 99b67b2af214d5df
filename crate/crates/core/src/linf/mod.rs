//! ℓ∞ solvers for nonexpansive maps: bisection in one dimension, a truncated
//! planar solver in two, and a decomposition that stacks planar blocks on top
//! of a lower-dimensional solver.

mod decompose;
mod interval;
mod planar;

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{BoxSpec, SLACK};
use crate::session::{drive, Oracle, Session, Solution};

pub use decompose::{
    compute_restriction_box, DecomposeMachine, DecompositionAudit, RestrictionBox,
};
pub use interval::{solve_interval_dagger, IntervalMachine};
pub use planar::{
    solve_planar_dagger, solve_planar_nonexp, truncation_candidates, CaseAnalysis,
    PlanarDaggerMachine, PlanarOutcome, TruncationCase,
};

/// A map `f` on `domain` whose answers lie within `eps` of `domain`.
#[derive(Clone, Debug, PartialEq)]
pub struct DaggerProblem {
    pub domain: BoxSpec,
    pub eps: f64,
}

impl DaggerProblem {
    pub fn new(domain: BoxSpec, eps: f64) -> Result<Self> {
        let p = DaggerProblem { domain, eps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::contract(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.domain.dim() == 0 {
            return Err(Error::contract("domain must have at least one coordinate"));
        }
        if !self
            .domain
            .is_subset_of(&BoxSpec::unit(self.domain.dim()), SLACK)
        {
            return Err(Error::contract("domain must lie inside the unit cube"));
        }
        Ok(())
    }
}

/// Recursion tree of an ℓ∞ solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinfPlan {
    Interval,
    Planar,
    Decompose {
        inner: Box<LinfPlan>,
        outer: Box<LinfPlan>,
    },
}

impl LinfPlan {
    /// Default tree: planar blocks on the outside, a 1- or 2-dimensional
    /// base innermost.
    pub fn for_dimension(k: usize) -> Result<LinfPlan> {
        match k {
            0 => Err(Error::contract("dimension must be at least 1")),
            1 => Ok(LinfPlan::Interval),
            2 => Ok(LinfPlan::Planar),
            _ => LinfPlan::with_outer(k, 2),
        }
    }

    /// Split `k = (k − b) + b` at the top; both parts use the default tree.
    pub fn with_outer(k: usize, b: usize) -> Result<LinfPlan> {
        if b == 0 || b >= k {
            return Err(Error::contract(format!(
                "cannot split {k} with an outer block of {b}"
            )));
        }
        Ok(LinfPlan::Decompose {
            inner: Box::new(LinfPlan::for_dimension(k - b)?),
            outer: Box::new(LinfPlan::for_dimension(b)?),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            LinfPlan::Interval => 1,
            LinfPlan::Planar => 2,
            LinfPlan::Decompose { inner, outer } => inner.dim() + outer.dim(),
        }
    }

    pub fn session(&self, problem: &DaggerProblem) -> Result<Session> {
        if problem.domain.dim() != self.dim() {
            return Err(Error::contract(format!(
                "plan of dimension {} given a {}-dimensional problem",
                self.dim(),
                problem.domain.dim()
            )));
        }
        match self {
            LinfPlan::Interval => Session::dynamic(IntervalMachine::new(problem)?),
            LinfPlan::Planar => Session::dynamic(PlanarDaggerMachine::new(problem)?),
            LinfPlan::Decompose { inner, outer } => {
                Session::dynamic(DecomposeMachine::new(problem, inner, outer)?)
            }
        }
    }

    /// A priori worst-case query count on `domain`.
    pub fn query_bound(&self, domain: &BoxSpec, eps: f64) -> usize {
        match self {
            LinfPlan::Interval => IntervalMachine::bound(domain.width(0), eps),
            // Nonexpansive solve, one fetch of f(x*), two repair candidates.
            LinfPlan::Planar => planar::planar_nonexp_bound(domain, eps).saturating_add(3),
            LinfPlan::Decompose { inner, outer } => {
                let a = inner.dim();
                inner
                    .query_bound(&domain.project(0..a), eps)
                    .saturating_mul(outer.query_bound(&domain.project(a..domain.dim()), eps))
            }
        }
    }

    /// Nesting of blocks, e.g. `(((1)+2)+2)` for five dimensions.
    pub fn block_structure(&self) -> String {
        self.to_string()
    }

    /// Dimension of the innermost block.
    pub fn base_dim(&self) -> usize {
        match self {
            LinfPlan::Decompose { inner, .. } => inner.base_dim(),
            leaf => leaf.dim(),
        }
    }
}

impl fmt::Display for LinfPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinfPlan::Decompose { inner, outer } => write!(f, "({inner}+{})", outer.dim()),
            leaf => write!(f, "({})", leaf.dim()),
        }
    }
}

/// Result of an ℓ∞ solve with whatever the top-level block recorded.
#[derive(Clone, Debug)]
pub struct LinfOutcome {
    pub solution: Solution,
    /// The top-level decomposition; in two dimensions, the 1+1
    /// decomposition inside the planar solver.
    pub audit: Option<DecompositionAudit>,
    pub case: Option<TruncationCase>,
}

/// Solve a † problem with an explicit recursion tree.
pub fn solve_with_plan(
    oracle: &dyn Oracle,
    problem: &DaggerProblem,
    plan: &LinfPlan,
) -> Result<LinfOutcome> {
    problem.validate()?;
    if oracle.dim() != problem.domain.dim() || plan.dim() != oracle.dim() {
        return Err(Error::contract(format!(
            "oracle dimension {}, problem dimension {}, plan dimension {}",
            oracle.dim(),
            problem.domain.dim(),
            plan.dim()
        )));
    }
    match plan {
        LinfPlan::Interval => Ok(LinfOutcome {
            solution: solve_interval_dagger(oracle, problem)?,
            audit: None,
            case: None,
        }),
        LinfPlan::Planar => {
            let out = solve_planar_dagger(oracle, problem)?;
            Ok(LinfOutcome {
                solution: out.solution,
                audit: Some(out.audit),
                case: Some(out.case),
            })
        }
        LinfPlan::Decompose { inner, outer } => {
            let (solution, audit) = decompose_solve(oracle, problem, inner, outer)?;
            Ok(LinfOutcome {
                solution,
                audit: Some(audit),
                case: None,
            })
        }
    }
}

/// One decomposition of `problem` into `inner` and `outer` blocks.
pub fn decompose_solve(
    oracle: &dyn Oracle,
    problem: &DaggerProblem,
    inner: &LinfPlan,
    outer: &LinfPlan,
) -> Result<(Solution, DecompositionAudit)> {
    let machine = DecomposeMachine::new(problem, inner, outer)?;
    let mut session = Session::start(Box::new(machine))?;
    let solution = drive(&mut session, oracle)?;
    Ok((solution, session.machine().audit().clone()))
}

/// eps-fixed point of a nonexpansive ℓ∞ map of `[0,1]^k` into itself.
pub fn solve_linf_top(oracle: &dyn Oracle, eps: f64) -> Result<LinfOutcome> {
    let k = oracle.dim();
    let plan = LinfPlan::for_dimension(k)?;
    solve_with_plan(oracle, &DaggerProblem::new(BoxSpec::unit(k), eps)?, &plan)
}
