//! Decomposition of an `(a+b)`-dimensional † problem into an `a`-dimensional
//! inner solver run once per query of a `b`-dimensional outer solver.
//!
//! The outer solver sees a virtual map `h` on the last `b` coordinates. For
//! each outer query `q`, the inner solver finds an eps-fixed point `y` of the
//! slice `x ↦ f(x, q)[..a]` restricted to a box built from earlier rounds,
//! and the outer solver is answered with `v = f(y, q)[a..]`. The restriction
//! box keeps the answers pairwise consistent with a nonexpansive `h`, so the
//! outer solver terminates; when `‖v − q‖∞ ≤ eps` the pair `(y, q)` is an
//! eps-fixed point of `f`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{distance, inflate, BoxSpec, NormKind, Point, SLACK};
use crate::session::{Machine, Session, SessionStatus, Step, Transcript};

use super::{DaggerProblem, LinfPlan};

/// The inner solver's search box for one round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestrictionBox {
    pub p_min: Point,
    pub p_max: Point,
}

impl RestrictionBox {
    pub fn to_box(&self) -> BoxSpec {
        BoxSpec::new(self.p_min.clone(), self.p_max.clone())
            .expect("restriction boxes are ordered on construction")
    }
}

/// `p_min,i = max(α_min,i, max_r (y^r_i − ‖q − q^r‖∞))` and
/// `p_max,i = min(α_max,i, min_r (y^r_i + ‖q − q^r‖∞))`, where the rounds
/// `r` are the records of `transcript` with side points `y^r`. With no prior
/// rounds this is the outer box itself.
pub fn compute_restriction_box(
    transcript: &Transcript,
    q: &[f64],
    outer_box: &BoxSpec,
) -> Result<RestrictionBox> {
    if transcript.side().len() != transcript.len() {
        return Err(Error::contract("transcript lacks inner solutions"));
    }
    let mut lo = outer_box.lower().clone().into_vec();
    let mut hi = outer_box.upper().clone().into_vec();
    for (rec, y) in transcript.records().iter().zip(transcript.side()) {
        if y.dim() != lo.len() || rec.query.dim() != q.len() {
            return Err(Error::contract(
                "transcript dimensions differ from the split",
            ));
        }
        let d = distance(q, &rec.query, NormKind::LInf);
        for i in 0..lo.len() {
            lo[i] = lo[i].max(y[i] - d);
            hi[i] = hi[i].min(y[i] + d);
        }
    }
    for i in 0..lo.len() {
        if lo[i] > hi[i] + SLACK {
            return Err(Error::breach(format!(
                "restriction box empty on coordinate {i}: {} > {}",
                lo[i], hi[i]
            )));
        }
        if lo[i] > hi[i] {
            let mid = 0.5 * (lo[i] + hi[i]);
            lo[i] = mid;
            hi[i] = mid;
        }
    }
    Ok(RestrictionBox {
        p_min: Point::new(lo),
        p_max: Point::new(hi),
    })
}

/// Per-run record of a decomposition: the outer transcript `(q^t, v^t)` with
/// inner solutions `y^t`, and how many queries each inner run used.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DecompositionAudit {
    pub inner_dim: usize,
    pub outer_dim: usize,
    pub transcript: Transcript,
    pub inner_queries: Vec<usize>,
    pub total_queries: usize,
}

impl DecompositionAudit {
    /// Largest query count of a single inner run.
    pub fn max_inner_queries(&self) -> usize {
        self.inner_queries.iter().copied().max().unwrap_or(0)
    }

    /// Queries issued by the outer solver (one per round).
    pub fn outer_queries(&self) -> usize {
        self.transcript.len()
    }
}

pub struct DecomposeMachine {
    domain: BoxSpec,
    range: BoxSpec,
    eps: f64,
    alpha: BoxSpec,
    inner_plan: LinfPlan,
    outer: Session,
    inner: Option<Session>,
    restriction: Option<RestrictionBox>,
    q: Point,
    fetching: Option<Point>,
    last_full: Option<Point>,
    inner_count: usize,
    bound: usize,
    audit: DecompositionAudit,
}

impl DecomposeMachine {
    pub fn new(problem: &DaggerProblem, inner: &LinfPlan, outer: &LinfPlan) -> Result<Self> {
        problem.validate()?;
        let (a, b) = (inner.dim(), outer.dim());
        if a + b != problem.domain.dim() {
            return Err(Error::contract(format!(
                "split {a}+{b} does not match dimension {}",
                problem.domain.dim()
            )));
        }
        let alpha = problem.domain.project(0..a);
        let beta = problem.domain.project(a..a + b);
        let outer_session = outer.session(&DaggerProblem::new(beta.clone(), problem.eps)?)?;
        let bound = inner
            .query_bound(&alpha, problem.eps)
            .saturating_mul(outer.query_bound(&beta, problem.eps));
        Ok(DecomposeMachine {
            range: inflate(&problem.domain, problem.eps)?,
            domain: problem.domain.clone(),
            eps: problem.eps,
            alpha,
            inner_plan: inner.clone(),
            outer: outer_session,
            inner: None,
            restriction: None,
            q: Point::default(),
            fetching: None,
            last_full: None,
            inner_count: 0,
            bound,
            audit: DecompositionAudit {
                inner_dim: a,
                outer_dim: b,
                ..Default::default()
            },
        })
    }

    pub fn audit(&self) -> &DecompositionAudit {
        &self.audit
    }

    fn a(&self) -> usize {
        self.audit.inner_dim
    }

    fn begin_round(&mut self, q: Point) -> Result<Step> {
        let restriction = compute_restriction_box(&self.audit.transcript, &q, &self.alpha)?;
        let sub = DaggerProblem::new(restriction.to_box(), self.eps)?;
        let inner = self.inner_plan.session(&sub)?;
        self.q = q;
        self.restriction = Some(restriction);
        self.inner_count = 0;
        let step = match inner.status().clone() {
            SessionStatus::PendingQuery(x) => Step::Query(x.concat(&self.q)),
            SessionStatus::Done(y) => {
                let query = y.concat(&self.q);
                self.fetching = Some(y);
                Step::Query(query)
            }
            SessionStatus::Failed(reason) => return Err(Error::breach(reason)),
        };
        self.inner = Some(inner);
        Ok(step)
    }

    fn finish_round(&mut self, y: Point, full: Point) -> Result<Step> {
        let a = self.a();
        let restriction = self.restriction.as_ref().expect("round in progress");
        let inner_residual = distance(&full[..a], &y, NormKind::LInf);
        if inner_residual > self.eps + SLACK {
            return Err(Error::breach(format!(
                "inner solution {y:?} has slice residual {inner_residual} > eps {}",
                self.eps
            )));
        }
        if !restriction.to_box().contains(&y, SLACK) {
            return Err(Error::breach(format!(
                "inner solution {y:?} outside its restriction box"
            )));
        }
        let v = full.slice(a..full.dim());
        for rec in self.audit.transcript.records() {
            let dv = distance(&rec.answer, &v, NormKind::LInf);
            let dq = distance(&rec.query, &self.q, NormKind::LInf);
            if dv > dq + SLACK {
                return Err(Error::breach(format!(
                    "outer answers inconsistent with a nonexpansive map: \
                     ‖v^{} − v‖ = {dv} > ‖q^{} − q‖ = {dq}",
                    rec.round, rec.round
                )));
            }
        }
        let q = self.q.clone();
        self.audit
            .transcript
            .push_with_side(q.clone(), v.clone(), y.clone());
        self.audit.inner_queries.push(self.inner_count);
        self.inner = None;

        if distance(&v, &q, NormKind::LInf) <= self.eps + SLACK {
            return Ok(Step::Done(y.concat(&q)));
        }
        match self.outer.step(v)?.clone() {
            SessionStatus::PendingQuery(next) => self.begin_round(next),
            SessionStatus::Done(p) => Err(Error::breach(format!(
                "outer solver stopped at {p:?} without an eps-fixed answer"
            ))),
            SessionStatus::Failed(reason) => Err(Error::breach(reason)),
        }
    }
}

impl Machine for DecomposeMachine {
    fn start(&mut self) -> Result<Step> {
        match self.outer.status().clone() {
            SessionStatus::PendingQuery(q) => self.begin_round(q),
            SessionStatus::Done(p) => Err(Error::breach(format!(
                "outer solver finished at {p:?} before querying"
            ))),
            SessionStatus::Failed(reason) => Err(Error::breach(reason)),
        }
    }

    fn resume(&mut self, answer: Point) -> Result<Step> {
        self.audit.total_queries += 1;
        let a = self.a();
        if let Some(y) = self.fetching.take() {
            return self.finish_round(y, answer);
        }
        self.inner_count += 1;
        let restriction = self.restriction.as_ref().expect("round in progress");
        let g = answer.slice(0..a);
        let inflated = inflate(&restriction.to_box(), self.eps)?;
        if !inflated.contains(&g, SLACK) {
            return Err(Error::breach(format!(
                "slice answer {g:?} leaves the inflated restriction box [{:?}, {:?}]",
                inflated.lower(),
                inflated.upper()
            )));
        }
        self.last_full = Some(answer);
        let inner = self.inner.as_mut().expect("round in progress");
        match inner.step(g)?.clone() {
            SessionStatus::PendingQuery(x) => Ok(Step::Query(x.concat(&self.q))),
            SessionStatus::Done(y) => {
                if inner.known_answer(&y).is_some() {
                    let full = self.last_full.take().expect("answer just stored");
                    self.finish_round(y, full)
                } else {
                    let query = y.concat(&self.q);
                    self.fetching = Some(y);
                    Ok(Step::Query(query))
                }
            }
            SessionStatus::Failed(reason) => Err(Error::breach(reason)),
        }
    }

    fn query_box(&self) -> &BoxSpec {
        &self.domain
    }

    fn answer_box(&self) -> &BoxSpec {
        &self.range
    }

    fn rounds(&self) -> usize {
        self.audit.transcript.len()
    }

    fn depth(&self) -> usize {
        let inner = self.inner.as_ref().map_or(0, |s| s.machine().depth());
        1 + inner.max(self.outer.machine().depth())
    }

    fn query_bound(&self) -> Option<usize> {
        Some(self.bound)
    }
}
