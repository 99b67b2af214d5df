//! One-dimensional † solver: bisection on the sign of `f(x) − x`.

use crate::error::{Error, Result};
use crate::geometry::{inflate, BoxSpec, Point, SLACK};
use crate::session::{drive, Machine, Oracle, Session, Solution, Step};

use super::DaggerProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Bisect,
    /// Interval is at most `2·eps` wide; the midpoint is within `eps` of
    /// both ends.
    Final,
    /// The midpoint pointed at an unqueried box end, which must then work.
    Endpoint,
}

/// Bisection over `[lo, hi]` keeping a fixed point of the truncated map
/// between the bracket ends: `f(lo) > lo + eps` whenever `lo` was queried and
/// `f(hi) < hi − eps` whenever `hi` was.
pub struct IntervalMachine {
    domain: BoxSpec,
    range: BoxSpec,
    eps: f64,
    lo: f64,
    hi: f64,
    lo_queried: bool,
    hi_queried: bool,
    current: f64,
    phase: Phase,
    queries: usize,
}

impl IntervalMachine {
    pub fn new(problem: &DaggerProblem) -> Result<Self> {
        problem.validate()?;
        if problem.domain.dim() != 1 {
            return Err(Error::contract("interval solver needs a 1-dimensional box"));
        }
        let (lo, hi) = (problem.domain.lower()[0], problem.domain.upper()[0]);
        Ok(IntervalMachine {
            range: inflate(&problem.domain, problem.eps)?,
            domain: problem.domain.clone(),
            eps: problem.eps,
            lo,
            hi,
            lo_queried: false,
            hi_queried: false,
            current: lo,
            phase: Phase::Bisect,
            queries: 0,
        })
    }

    /// `⌈log₂(width/eps)⌉ + 2`, the bisection's worst case.
    pub fn bound(width: f64, eps: f64) -> usize {
        let halvings = (width / eps).log2().ceil();
        (if halvings.is_finite() && halvings > 0.0 {
            halvings as usize
        } else {
            0
        }) + 2
    }

    fn ask(&mut self, x: f64, phase: Phase) -> Step {
        self.current = x;
        self.phase = phase;
        Step::Query(Point::new(vec![x]))
    }

    fn next(&mut self) -> Step {
        let mid = 0.5 * (self.lo + self.hi);
        if self.hi - self.lo > 2.0 * self.eps + SLACK {
            self.ask(mid, Phase::Bisect)
        } else {
            self.ask(mid, Phase::Final)
        }
    }
}

impl Machine for IntervalMachine {
    fn start(&mut self) -> Result<Step> {
        Ok(self.next())
    }

    fn resume(&mut self, answer: Point) -> Result<Step> {
        self.queries += 1;
        let x = self.current;
        let displacement = answer[0] - x;
        if displacement.abs() <= self.eps + SLACK {
            return Ok(Step::Done(Point::new(vec![x])));
        }
        match self.phase {
            Phase::Bisect => {
                if displacement > 0.0 {
                    self.lo = x;
                    self.lo_queried = true;
                } else {
                    self.hi = x;
                    self.hi_queried = true;
                }
                Ok(self.next())
            }
            Phase::Final => {
                // Nonexpansiveness against a queried bracket end rules this
                // direction out; only an unqueried box end can remain.
                let (end, queried) = if displacement > 0.0 {
                    (self.hi, self.hi_queried)
                } else {
                    (self.lo, self.lo_queried)
                };
                if queried {
                    return Err(Error::breach(format!(
                        "bisection bracket [{}, {}] admits no eps-fixed point at {x} \
                         (displacement {displacement}); oracle is not nonexpansive",
                        self.lo, self.hi
                    )));
                }
                Ok(self.ask(end, Phase::Endpoint))
            }
            Phase::Endpoint => Err(Error::breach(format!(
                "box end {x} has displacement {displacement} beyond eps {}",
                self.eps
            ))),
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

    fn query_bound(&self) -> Option<usize> {
        Some(Self::bound(self.domain.width(0), self.eps))
    }
}

/// Solve a 1-dimensional † problem by bisection.
pub fn solve_interval_dagger(oracle: &dyn Oracle, problem: &DaggerProblem) -> Result<Solution> {
    let mut session = Session::start(Box::new(IntervalMachine::new(problem)?))?;
    drive(&mut session, oracle)
}
