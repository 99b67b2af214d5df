//! Two-dimensional † solver: truncate, solve the nonexpansive problem, then
//! repair the answer when truncation hid a large displacement.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{distance, inflate, BoxSpec, NormKind, Point, SLACK};
use crate::session::{drive, Machine, Oracle, Session, SessionStatus, Solution, Step};

use super::decompose::{DecomposeMachine, DecompositionAudit};
use super::{DaggerProblem, LinfPlan};

/// Which branch of the truncation repair produced the answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TruncationCase {
    /// The nonexpansive solver's point already works for `f`.
    Direct,
    /// Both coordinates of `f(x*)` left the box: the far corner works.
    BothTruncated,
    /// Exactly one coordinate (0-based index) left the box.
    OneTruncated { coordinate: usize },
}

/// Candidates to try, in order, when `x*` is an eps-fixed point of the
/// truncated map but not of `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseAnalysis {
    pub case: TruncationCase,
    pub candidates: Vec<Point>,
}

/// Per-coordinate reflection `v ↦ lo + hi − v` that makes `f(x*)_i ≥ x*_i`
/// for both coordinates.
struct Orientation<'a> {
    domain: &'a BoxSpec,
    flip: [bool; 2],
}

impl Orientation<'_> {
    fn map(&self, v: &[f64]) -> [f64; 2] {
        let mut out = [v[0], v[1]];
        for i in 0..2 {
            if self.flip[i] {
                out[i] = self.domain.lower()[i] + self.domain.upper()[i] - v[i];
            }
        }
        out
    }

    /// Reflection is an involution.
    fn point(&self, v: [f64; 2]) -> Point {
        let mut p = self.map(&v);
        // Keep reflected candidates exactly inside the box.
        for (i, c) in p.iter_mut().enumerate() {
            *c = c.clamp(self.domain.lower()[i], self.domain.upper()[i]);
        }
        Point::new(p.to_vec())
    }
}

/// The repair step for a planar † problem. `x_star` must be an eps-fixed
/// point of the truncated map with `‖f(x*) − x*‖∞ > eps`.
pub fn truncation_candidates(
    domain: &BoxSpec,
    eps: f64,
    x_star: &Point,
    fx_star: &Point,
) -> Result<CaseAnalysis> {
    if domain.dim() != 2 || x_star.dim() != 2 || fx_star.dim() != 2 {
        return Err(Error::contract("truncation repair is two-dimensional"));
    }
    let orient = Orientation {
        domain,
        flip: [fx_star[0] < x_star[0], fx_star[1] < x_star[1]],
    };
    let x = orient.map(x_star);
    let fx = orient.map(fx_star);
    let hi = [domain.upper()[0], domain.upper()[1]];

    let truncated = [fx[0] > hi[0], fx[1] > hi[1]];
    for i in 0..2 {
        if fx[i] - x[i] > eps + SLACK && !truncated[i] {
            return Err(Error::breach(format!(
                "coordinate {i} is displaced by {} without truncation; \
                 the nonexpansive solver's answer is not eps-fixed",
                fx[i] - x[i]
            )));
        }
    }
    match truncated {
        [true, true] => Ok(CaseAnalysis {
            case: TruncationCase::BothTruncated,
            candidates: vec![orient.point(hi)],
        }),
        [false, false] => Err(Error::breach(
            "residual exceeds eps but no coordinate of f(x*) was truncated",
        )),
        [t0, _] => {
            let j = if t0 { 0 } else { 1 };
            let i = 1 - j;
            let mut y = [0.0; 2];
            y[i] = x[i];
            y[j] = hi[j];
            let mut y2 = y;
            y2[i] = hi[i].min(x[i] + eps);
            Ok(CaseAnalysis {
                case: TruncationCase::OneTruncated { coordinate: j },
                candidates: vec![orient.point(y), orient.point(y2)],
            })
        }
    }
}

enum Phase {
    Inner,
    FetchStar(Point),
    Candidates {
        current: Point,
        rest: VecDeque<Point>,
    },
}

pub struct PlanarDaggerMachine {
    domain: BoxSpec,
    range: BoxSpec,
    eps: f64,
    inner: Session<DecomposeMachine>,
    phase: Phase,
    case: Option<TruncationCase>,
    tried: usize,
    last_raw: Option<Point>,
    queries: usize,
    bound: usize,
}

impl PlanarDaggerMachine {
    pub fn new(problem: &DaggerProblem) -> Result<Self> {
        problem.validate()?;
        if problem.domain.dim() != 2 {
            return Err(Error::contract("planar solver needs a 2-dimensional box"));
        }
        let inner = Session::start(Box::new(planar_nonexp_machine(problem)?))?;
        Ok(PlanarDaggerMachine {
            range: inflate(&problem.domain, problem.eps)?,
            domain: problem.domain.clone(),
            eps: problem.eps,
            inner,
            phase: Phase::Inner,
            case: None,
            tried: 0,
            last_raw: None,
            queries: 0,
            bound: LinfPlan::Planar.query_bound(&problem.domain, problem.eps),
        })
    }

    /// Branch taken, once the machine has finished.
    pub fn case(&self) -> Option<TruncationCase> {
        self.case
    }

    /// Record of the inner 1+1 decomposition.
    pub fn audit(&self) -> &DecompositionAudit {
        self.inner.machine().audit()
    }

    /// Repair candidates queried so far.
    pub fn candidates_tried(&self) -> usize {
        self.tried
    }

    fn residual(x: &[f64], fx: &[f64]) -> f64 {
        distance(x, fx, NormKind::LInf)
    }

    fn analyse(&mut self, x: Point, fx: Point) -> Result<Step> {
        if Self::residual(&x, &fx) <= self.eps + SLACK {
            self.case = Some(TruncationCase::Direct);
            return Ok(Step::Done(x));
        }
        let analysis = truncation_candidates(&self.domain, self.eps, &x, &fx)?;
        self.case = Some(analysis.case);
        let mut rest: VecDeque<Point> = analysis.candidates.into();
        let current = rest.pop_front().expect("at least one candidate");
        self.tried = 1;
        self.phase = Phase::Candidates {
            current: current.clone(),
            rest,
        };
        Ok(Step::Query(current))
    }
}

impl Machine for PlanarDaggerMachine {
    fn start(&mut self) -> Result<Step> {
        match self.inner.status().clone() {
            SessionStatus::PendingQuery(x) => Ok(Step::Query(x)),
            SessionStatus::Done(x) => {
                self.phase = Phase::FetchStar(x.clone());
                Ok(Step::Query(x))
            }
            SessionStatus::Failed(reason) => Err(Error::breach(reason)),
        }
    }

    fn resume(&mut self, answer: Point) -> Result<Step> {
        self.queries += 1;
        match std::mem::replace(&mut self.phase, Phase::Inner) {
            Phase::Inner => {
                let truncated = self.domain.clamp(&answer);
                self.last_raw = Some(answer);
                match self.inner.step(truncated)?.clone() {
                    SessionStatus::PendingQuery(x) => Ok(Step::Query(x)),
                    SessionStatus::Done(x) => {
                        if self.inner.known_answer(&x).is_some() {
                            let raw = self.last_raw.take().expect("answer just stored");
                            self.analyse(x, raw)
                        } else {
                            self.phase = Phase::FetchStar(x.clone());
                            Ok(Step::Query(x))
                        }
                    }
                    SessionStatus::Failed(reason) => Err(Error::breach(reason)),
                }
            }
            Phase::FetchStar(x) => self.analyse(x, answer),
            Phase::Candidates { current, mut rest } => {
                let residual = Self::residual(&current, &answer);
                if residual <= self.eps + SLACK {
                    return Ok(Step::Done(current));
                }
                match rest.pop_front() {
                    Some(next) => {
                        self.tried += 1;
                        self.phase = Phase::Candidates {
                            current: next.clone(),
                            rest,
                        };
                        Ok(Step::Query(next))
                    }
                    None => Err(Error::CaseAnalysisExhausted {
                        residual,
                        eps: self.eps,
                    }),
                }
            }
        }
    }

    fn query_box(&self) -> &BoxSpec {
        &self.domain
    }

    fn answer_box(&self) -> &BoxSpec {
        &self.range
    }

    fn rounds(&self) -> usize {
        self.queries
    }

    fn depth(&self) -> usize {
        1 + self.inner.machine().depth()
    }

    fn query_bound(&self) -> Option<usize> {
        Some(self.bound)
    }
}

/// The required planar nonexpansive solver: a 1+1 decomposition with
/// bisection on both sides, `O(log²(1/eps))` queries.
fn planar_nonexp_machine(problem: &DaggerProblem) -> Result<DecomposeMachine> {
    DecomposeMachine::new(problem, &LinfPlan::Interval, &LinfPlan::Interval)
}

pub(crate) fn planar_nonexp_bound(domain: &BoxSpec, eps: f64) -> usize {
    LinfPlan::Interval
        .query_bound(&domain.project(0..1), eps)
        .saturating_mul(LinfPlan::Interval.query_bound(&domain.project(1..2), eps))
}

/// eps-fixed point of a nonexpansive ℓ∞ map of `[0,1]²` into itself.
pub fn solve_planar_nonexp(oracle: &dyn Oracle, eps: f64) -> Result<Solution> {
    if oracle.dim() != 2 {
        return Err(Error::contract(
            "planar solver needs a 2-dimensional oracle",
        ));
    }
    let problem = DaggerProblem::new(BoxSpec::unit(2), eps)?;
    let mut session = Session::start(Box::new(planar_nonexp_machine(&problem)?))?;
    drive(&mut session, oracle)
}

#[derive(Clone, Debug)]
pub struct PlanarOutcome {
    pub solution: Solution,
    pub case: TruncationCase,
    /// 0 when the nonexpansive solver's point was returned directly; for
    /// one truncated coordinate, 2 means `y` failed and `y'` was returned.
    pub candidates_tried: usize,
    pub audit: DecompositionAudit,
}

/// eps-fixed point of a planar † problem, with the repair branch taken.
pub fn solve_planar_dagger(oracle: &dyn Oracle, problem: &DaggerProblem) -> Result<PlanarOutcome> {
    let mut session = Session::start(Box::new(PlanarDaggerMachine::new(problem)?))?;
    let solution = drive(&mut session, oracle)?;
    let m = session.machine();
    Ok(PlanarOutcome {
        solution,
        case: m.case().expect("finished planar session has a case"),
        candidates_tried: m.candidates_tried(),
        audit: m.audit().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::FnOracle;

    fn unit2(eps: f64) -> DaggerProblem {
        DaggerProblem::new(BoxSpec::unit(2), eps).unwrap()
    }

    fn residual(f: &dyn Oracle, x: &Point) -> f64 {
        distance(&f.evaluate(x).unwrap(), x, NormKind::LInf)
    }

    #[test]
    fn both_truncated_returns_corner() {
        let f = FnOracle::new(2, |_: &[f64]| vec![1.04, 1.04]);
        let out = solve_planar_dagger(&f, &unit2(0.05)).unwrap();
        let sol = out.solution;
        assert_eq!(out.case, TruncationCase::BothTruncated);
        assert_eq!(sol.point.coords(), &[1.0, 1.0]);
        assert!((residual(&f, &sol.point) - 0.04).abs() < 1e-12);
    }

    #[test]
    fn one_truncated_returns_y() {
        let f = FnOracle::new(2, |_: &[f64]| vec![0.5, 1.03]);
        let out = solve_planar_dagger(&f, &unit2(0.05)).unwrap();
        let sol = out.solution;
        assert_eq!(out.case, TruncationCase::OneTruncated { coordinate: 1 });
        assert_eq!(out.candidates_tried, 1);
        assert_eq!(sol.point.coords(), &[0.5, 1.0]);
        assert!(residual(&f, &sol.point) <= 0.05);
    }

    #[test]
    fn identity_is_direct() {
        let f = FnOracle::new(2, |x: &[f64]| x.to_vec());
        let out = solve_planar_dagger(&f, &unit2(1e-3)).unwrap();
        assert_eq!(out.case, TruncationCase::Direct);
        assert_eq!(out.candidates_tried, 0);
        assert_eq!(residual(&f, &out.solution.point), 0.0);
    }

    #[test]
    fn one_truncated_falls_back_to_y_prime() {
        // f₁ moves with x₂, so lifting x₂ to the top face breaks y; the
        // shifted point y' absorbs the move.
        let f = FnOracle::new(2, |x: &[f64]| vec![(x[1] - 0.41975).max(0.0), 1.03]);
        let out = solve_planar_dagger(&f, &unit2(0.05)).unwrap();
        assert_eq!(out.case, TruncationCase::OneTruncated { coordinate: 1 });
        assert_eq!(out.candidates_tried, 2);
        assert!(residual(&f, &out.solution.point) <= 0.05 + SLACK);
    }

    #[test]
    fn candidates_for_one_truncated_coordinate() {
        let domain = BoxSpec::unit(2);
        let a =
            truncation_candidates(&domain, 0.05, &[0.5, 0.96].into(), &[0.5, 1.03].into()).unwrap();
        assert_eq!(a.case, TruncationCase::OneTruncated { coordinate: 1 });
        assert_eq!(a.candidates[0].coords(), &[0.5, 1.0]);
        assert!((a.candidates[1][0] - 0.55).abs() < 1e-15);
        assert_eq!(a.candidates[1][1], 1.0);
    }

    #[test]
    fn candidates_under_reflection() {
        // f pushes both coordinates below the box: the lower corner works.
        let domain = BoxSpec::new([0.2, 0.1].into(), [0.6, 0.9].into()).unwrap();
        let a = truncation_candidates(&domain, 0.05, &[0.22, 0.13].into(), &[0.16, 0.06].into())
            .unwrap();
        assert_eq!(a.case, TruncationCase::BothTruncated);
        assert!((a.candidates[0][0] - 0.2).abs() < 1e-15);
        assert!((a.candidates[0][1] - 0.1).abs() < 1e-15);

        // Coordinate 0 truncated downwards, coordinate 1 displaced upwards.
        let a = truncation_candidates(&domain, 0.05, &[0.23, 0.5].into(), &[0.17, 0.52].into())
            .unwrap();
        assert_eq!(a.case, TruncationCase::OneTruncated { coordinate: 0 });
        assert!((a.candidates[0][0] - 0.2).abs() < 1e-15);
        assert_eq!(a.candidates[0][1], 0.5);
        assert!((a.candidates[1][1] - 0.55).abs() < 1e-12);
    }

    #[test]
    fn untruncated_violation_is_breach() {
        let domain = BoxSpec::unit(2);
        assert!(matches!(
            truncation_candidates(&domain, 0.05, &[0.5, 0.5].into(), &[0.7, 0.5].into()),
            Err(Error::InvariantBreach(_))
        ));
    }

    #[test]
    fn swap_map() {
        let f = FnOracle::new(2, |x: &[f64]| vec![x[1], x[0]]);
        let sol = solve_planar_nonexp(&f, 1e-3).unwrap();
        assert!((sol.point[0] - sol.point[1]).abs() <= 1e-3 + SLACK);
        assert!(sol.stats.queries <= planar_nonexp_bound(&BoxSpec::unit(2), 1e-3));
    }
}
