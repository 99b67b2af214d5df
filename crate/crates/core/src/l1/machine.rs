use crate::error::{Error, Result};
use crate::geometry::{distance, BoxSpec, NormKind, Point, SLACK};
use crate::session::{Machine, Session, SessionStatus, Step};

use super::window::{select_dominating_coordinate, PlaneWindow};

/// Smallest admissible deepest-level precision `eps·(γ/4)^{k/2−1}`.
pub const PRECISION_FLOOR: f64 = 1e-9;

/// Recursive ℓ1 contraction solver for even `k`.
///
/// Each round fixes the first two coordinates at the window midpoint, solves
/// the slice `y ↦ f(mid, y)[2..]` to precision `eps·γ/4` with a child
/// machine, then queries `x = (mid, y*)`. If `x` is not eps-fixed the window
/// loses the half (plus `eps·γ/8`) that cannot hold the fixed point along
/// the dominating coordinate.
pub struct L1Machine {
    k: usize,
    eps: f64,
    gamma: f64,
    domain: BoxSpec,
    window: PlaneWindow,
    history: Vec<PlaneWindow>,
    mid: Point,
    child: Option<Session<L1Machine>>,
    fetching: Option<Point>,
    rounds: usize,
    shrinks: [usize; 2],
    cap: usize,
    bound: usize,
}

impl L1Machine {
    pub fn new(k: usize, eps: f64, gamma: f64) -> Result<Self> {
        check_parameters(k, eps, gamma)?;
        Ok(L1Machine {
            k,
            eps,
            gamma,
            domain: BoxSpec::unit(k),
            window: PlaneWindow::unit(),
            history: Vec::new(),
            mid: Point::default(),
            child: None,
            fetching: None,
            rounds: 0,
            shrinks: [0, 0],
            cap: round_cap(eps, gamma),
            bound: query_bound(k, eps, gamma),
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Windows after each non-terminal round.
    pub fn window_history(&self) -> &[PlaneWindow] {
        &self.history
    }

    pub fn shrinks(&self) -> [usize; 2] {
        self.shrinks
    }

    pub fn round_cap(&self) -> usize {
        self.cap
    }

    pub fn child(&self) -> Option<&Session<L1Machine>> {
        self.child.as_ref()
    }

    fn begin_round(&mut self) -> Result<Step> {
        self.mid = Point::from(self.window.mid());
        if self.k == 2 {
            let x = self.mid.clone();
            self.fetching = Some(x.clone());
            return Ok(Step::Query(x));
        }
        let child = Session::start(Box::new(L1Machine::new(
            self.k - 2,
            self.eps * self.gamma / 4.0,
            self.gamma,
        )?))?;
        let step = match child.status().clone() {
            SessionStatus::PendingQuery(y) => Step::Query(self.mid.concat(&y)),
            SessionStatus::Done(y) => {
                let x = self.mid.concat(&y);
                self.fetching = Some(x.clone());
                Step::Query(x)
            }
            SessionStatus::Failed(reason) => return Err(Error::breach(reason)),
        };
        self.child = Some(child);
        Ok(step)
    }

    fn finish_round(&mut self, x: Point, fx: Point) -> Result<Step> {
        self.rounds += 1;
        if distance(&x, &fx, NormKind::L1) <= self.eps + SLACK {
            return Ok(Step::Done(x));
        }
        let (i, dir) = select_dominating_coordinate(&x, &fx)?;
        self.window
            .shrink(i, dir, x[i], self.eps * self.gamma / 8.0)?;
        self.shrinks[i] += 1;
        self.history.push(self.window.clone());
        if self.rounds >= self.cap {
            return Err(Error::breach(format!(
                "no eps-fixed point after {} rounds (cap {}); map is not a contraction",
                self.rounds, self.cap
            )));
        }
        self.begin_round()
    }
}

impl Machine for L1Machine {
    fn start(&mut self) -> Result<Step> {
        self.begin_round()
    }

    fn resume(&mut self, answer: Point) -> Result<Step> {
        if let Some(x) = self.fetching.take() {
            return self.finish_round(x, answer);
        }
        let child = self.child.as_mut().expect("round in progress");
        match child.step(answer.slice(2..self.k))?.clone() {
            SessionStatus::PendingQuery(y) => Ok(Step::Query(self.mid.concat(&y))),
            SessionStatus::Done(y) => {
                let x = self.mid.concat(&y);
                if child.known_answer(&y).is_some() {
                    self.finish_round(x, answer)
                } else {
                    self.fetching = Some(x.clone());
                    Ok(Step::Query(x))
                }
            }
            SessionStatus::Failed(reason) => Err(Error::breach(reason)),
        }
    }

    fn query_box(&self) -> &BoxSpec {
        &self.domain
    }

    fn answer_box(&self) -> &BoxSpec {
        &self.domain
    }

    fn rounds(&self) -> usize {
        self.rounds
    }

    fn depth(&self) -> usize {
        1 + self.child.as_ref().map_or(0, |c| c.machine().depth())
    }

    fn query_bound(&self) -> Option<usize> {
        Some(self.bound)
    }
}

fn check_parameters(k: usize, eps: f64, gamma: f64) -> Result<()> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::contract(format!(
            "recursive solver needs even k ≥ 2, got {k}"
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::contract(format!("eps must be positive, got {eps}")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::contract(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )));
    }
    let deepest = deepest_precision(k, eps, gamma);
    if deepest < PRECISION_FLOOR {
        return Err(Error::PrecisionFloor(format!(
            "k = {k}, eps = {eps}, gamma = {gamma} needs precision {deepest:e} \
             at the deepest level, below {PRECISION_FLOOR:e}"
        )));
    }
    Ok(())
}

/// `eps·(γ/4)^{k/2−1}`, the precision of the innermost planar solve.
pub fn deepest_precision(k: usize, eps: f64, gamma: f64) -> f64 {
    eps * (gamma / 4.0).powi((k / 2) as i32 - 1)
}

/// `⌈2·log₂(8/(eps·γ))⌉ + 4`.
pub fn round_cap(eps: f64, gamma: f64) -> usize {
    (2.0 * (8.0 / (eps * gamma)).log2()).ceil().max(0.0) as usize + 4
}

/// `⌈log₂(8/(eps·γ))⌉ + 2`, the most times one window coordinate can shrink.
pub fn shrink_bound(eps: f64, gamma: f64) -> usize {
    (8.0 / (eps * gamma)).log2().ceil().max(0.0) as usize + 2
}

/// Worst-case queries: every round may need the child's full budget plus
/// one query at `x`.
pub fn query_bound(k: usize, eps: f64, gamma: f64) -> usize {
    let cap = round_cap(eps, gamma);
    if k <= 2 {
        cap
    } else {
        cap.saturating_mul(query_bound(k - 2, eps * gamma / 4.0, gamma).saturating_add(1))
    }
}
