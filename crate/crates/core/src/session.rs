//! The black-box oracle interface and resumable solver sessions.
//!
//! Every solver in this crate is written as a [`Machine`]: a step function
//! over explicit state that emits one query point at a time and consumes the
//! oracle's answer. [`Session`] wraps a machine, enforces the range and
//! query-box contracts, and remembers the last exchange so composite solvers
//! can reuse an answer instead of paying for a second query. [`drive`] runs a
//! session against a concrete [`Oracle`], counting and recording every
//! evaluation.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BoxSpec, Point, SLACK};

/// Black-box access to a map `f`. Evaluation must be a pure function of the
/// oracle and the point.
pub trait Oracle {
    fn dim(&self) -> usize;
    fn evaluate(&self, x: &Point) -> Result<Point>;
}

impl<O: Oracle + ?Sized> Oracle for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn evaluate(&self, x: &Point) -> Result<Point> {
        (**self).evaluate(x)
    }
}

/// Adapts a closure into an [`Oracle`].
pub struct FnOracle<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64>> FnOracle<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnOracle { dim, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64>> Oracle for FnOracle<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn evaluate(&self, x: &Point) -> Result<Point> {
        if x.dim() != self.dim {
            return Err(Error::contract(
                "query dimension differs from oracle dimension",
            ));
        }
        Point::try_new((self.f)(x)).map_err(|e| Error::oracle(e.to_string()))
    }
}

/// What a machine wants next.
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Query(Point),
    Done(Point),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SessionStatus {
    PendingQuery(Point),
    Done(Point),
    Failed(String),
}

impl SessionStatus {
    pub fn is_done(&self) -> bool {
        matches!(self, SessionStatus::Done(_))
    }
}

/// A solver written as an explicit state machine.
pub trait Machine {
    /// First step. Called exactly once.
    fn start(&mut self) -> Result<Step>;

    /// Consume the answer to the most recently emitted query.
    fn resume(&mut self, answer: Point) -> Result<Step>;

    /// Every emitted query lies in this box.
    fn query_box(&self) -> &BoxSpec;

    /// Every acceptable answer lies in this box (already inflated).
    fn answer_box(&self) -> &BoxSpec;

    /// Solver-level rounds completed so far.
    fn rounds(&self) -> usize;

    /// Nesting depth of the machine tree currently alive.
    fn depth(&self) -> usize {
        1
    }

    /// A priori worst-case number of queries, if the solver states one.
    fn query_bound(&self) -> Option<usize> {
        None
    }
}

/// A started machine plus its observable status.
pub struct Session<M: Machine + ?Sized = dyn Machine> {
    status: SessionStatus,
    last: Option<(Point, Point)>,
    answered: usize,
    machine: Box<M>,
}

impl Session {
    /// Start a type-erased session.
    pub fn dynamic<M: Machine + 'static>(machine: M) -> Result<Session> {
        Session::start(Box::new(machine) as Box<dyn Machine>)
    }
}

impl<M: Machine + ?Sized> Session<M> {
    pub fn start(mut machine: Box<M>) -> Result<Self> {
        let first = machine.start();
        let mut session = Session {
            status: SessionStatus::Failed("not started".into()),
            last: None,
            answered: 0,
            machine,
        };
        session.apply(first)?;
        Ok(session)
    }

    pub fn status(&self) -> &SessionStatus {
        &self.status
    }

    pub fn machine(&self) -> &M {
        &self.machine
    }

    /// Number of answers consumed so far.
    pub fn answered(&self) -> usize {
        self.answered
    }

    /// Answer the pending query and advance.
    pub fn step(&mut self, answer: Point) -> Result<&SessionStatus> {
        let query = match &self.status {
            SessionStatus::PendingQuery(q) => q.clone(),
            SessionStatus::Done(_) => {
                return Err(Error::contract("answer supplied to a finished session"))
            }
            SessionStatus::Failed(reason) => {
                return Err(Error::contract(format!(
                    "answer supplied to a failed session ({reason})"
                )))
            }
        };
        let range = self.machine.answer_box();
        if answer.dim() != range.dim() || !answer.is_finite() {
            let err = Error::oracle(format!(
                "answer {answer:?} is not a finite point of dimension {}",
                range.dim()
            ));
            self.status = SessionStatus::Failed(err.to_string());
            return Err(err);
        }
        if !range.contains(&answer, SLACK) {
            let err = Error::oracle(format!(
                "answer {answer:?} to query {query:?} leaves the range box [{:?}, {:?}]",
                range.lower(),
                range.upper()
            ));
            self.status = SessionStatus::Failed(err.to_string());
            return Err(err);
        }
        self.answered += 1;
        self.last = Some((query, answer.clone()));
        let next = self.machine.resume(answer);
        self.apply(next)?;
        Ok(&self.status)
    }

    /// The answer already received for `x`, if `x` was the last query.
    pub fn known_answer(&self, x: &Point) -> Option<&Point> {
        match &self.last {
            Some((q, a)) if q.same_bits(x) => Some(a),
            _ => None,
        }
    }

    fn apply(&mut self, step: Result<Step>) -> Result<()> {
        match step {
            Ok(Step::Query(q)) => {
                if !self.machine.query_box().contains(&q, SLACK) {
                    let err = Error::breach(format!(
                        "query {q:?} outside the declared query box [{:?}, {:?}]",
                        self.machine.query_box().lower(),
                        self.machine.query_box().upper()
                    ));
                    self.status = SessionStatus::Failed(err.to_string());
                    return Err(err);
                }
                if let Some(bound) = self.machine.query_bound() {
                    if self.answered + 1 > bound {
                        let err = Error::breach(format!("query bound {bound} exceeded"));
                        self.status = SessionStatus::Failed(err.to_string());
                        return Err(err);
                    }
                }
                self.status = SessionStatus::PendingQuery(q);
                Ok(())
            }
            Ok(Step::Done(x)) => {
                self.status = SessionStatus::Done(x);
                Ok(())
            }
            Err(e) => {
                self.status = SessionStatus::Failed(e.to_string());
                Err(e)
            }
        }
    }
}

/// One oracle exchange.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryRecord {
    pub round: usize,
    pub query: Point,
    pub answer: Point,
}

/// Ordered query/answer records, optionally with one side point per round
/// (the inner solutions of a decomposition).
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Transcript {
    records: Vec<QueryRecord>,
    side: Vec<Point>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append the next round; rounds are numbered from 1.
    pub fn push(&mut self, query: Point, answer: Point) -> usize {
        let round = self.records.len() + 1;
        self.records.push(QueryRecord {
            round,
            query,
            answer,
        });
        round
    }

    pub fn push_with_side(&mut self, query: Point, answer: Point, side: Point) -> usize {
        debug_assert_eq!(self.side.len(), self.records.len());
        self.side.push(side);
        self.push(query, answer)
    }

    pub fn records(&self) -> &[QueryRecord] {
        &self.records
    }

    pub fn side(&self) -> &[Point] {
        &self.side
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub queries: usize,
    pub rounds: usize,
    pub max_recursion_depth: usize,
    pub wall_time: f64,
}

/// Result of driving a session to completion.
#[derive(Clone, Debug)]
pub struct Solution {
    pub point: Point,
    /// `f(point)` when the solver's last query was `point` itself.
    pub answer: Option<Point>,
    pub stats: SolveStats,
    /// Every oracle evaluation, in order.
    pub transcript: Transcript,
}

/// Run `session` against `oracle` until it finishes.
pub fn drive<M: Machine + ?Sized>(
    session: &mut Session<M>,
    oracle: &dyn Oracle,
) -> Result<Solution> {
    let clock = Instant::now();
    let mut transcript = Transcript::new();
    let mut max_depth = session.machine().depth();
    loop {
        let query = match session.status() {
            SessionStatus::PendingQuery(q) => q.clone(),
            SessionStatus::Done(x) => {
                let point = x.clone();
                let answer = session.known_answer(&point).cloned();
                let stats = SolveStats {
                    queries: transcript.len(),
                    rounds: session.machine().rounds(),
                    max_recursion_depth: max_depth,
                    wall_time: clock.elapsed().as_secs_f64(),
                };
                return Ok(Solution {
                    point,
                    answer,
                    stats,
                    transcript,
                });
            }
            SessionStatus::Failed(reason) => return Err(Error::breach(reason.clone())),
        };
        let answer = oracle.evaluate(&query)?;
        transcript.push(query, answer.clone());
        session.step(answer)?;
        max_depth = max_depth.max(session.machine().depth());
    }
}
