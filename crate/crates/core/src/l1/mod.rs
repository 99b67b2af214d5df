//! ℓ1 solvers: a recursive window search for contractions and the scaling
//! reduction that handles nonexpansive maps.

mod machine;
mod window;

use crate::error::{Error, Result};
use crate::geometry::{distance, BoxSpec, NormKind, Point, SLACK};
use crate::linf::{solve_interval_dagger, DaggerProblem};
use crate::oracles::transform::{Padded, Scaled};
use crate::session::{drive, Oracle, Session, Solution};

pub use machine::{
    deepest_precision, query_bound, round_cap, shrink_bound, L1Machine, PRECISION_FLOOR,
};
pub use window::{select_dominating_coordinate, Direction, PlaneWindow};

#[derive(Clone, Debug)]
pub struct L1Outcome {
    /// Point in the oracle's own dimension.
    pub solution: Solution,
    /// The solved point before dropping the padding coordinate, for odd `k`.
    pub padded_point: Option<Point>,
    /// Top-level windows after each non-terminal round.
    pub windows: Vec<PlaneWindow>,
    pub shrinks: [usize; 2],
    pub round_cap: usize,
}

/// eps-fixed point (in ℓ1) of a `(1−γ)`-contraction of `[0,1]^k`. Odd `k`
/// is padded with a coordinate that maps to zero; transcript points then
/// carry the extra coordinate.
pub fn solve_l1_contraction(oracle: &dyn Oracle, eps: f64, gamma: f64) -> Result<L1Outcome> {
    let k = oracle.dim();
    if k == 0 {
        return Err(Error::contract("dimension must be at least 1"));
    }
    if k.is_multiple_of(2) {
        return solve_even(oracle, eps, gamma);
    }
    let padded = Padded::new(oracle);
    let mut out = solve_even(&padded, eps, gamma)?;
    unpad(&mut out, k);
    Ok(out)
}

fn solve_even(oracle: &dyn Oracle, eps: f64, gamma: f64) -> Result<L1Outcome> {
    let mut session = Session::start(Box::new(L1Machine::new(oracle.dim(), eps, gamma)?))?;
    let solution = drive(&mut session, oracle)?;
    let m = session.machine();
    Ok(L1Outcome {
        windows: m.window_history().to_vec(),
        shrinks: m.shrinks(),
        round_cap: m.round_cap(),
        padded_point: None,
        solution,
    })
}

fn unpad(out: &mut L1Outcome, k: usize) {
    let full = out.solution.point.clone();
    out.solution.point = full.slice(0..k);
    out.solution.answer = out.solution.answer.take().map(|a| a.slice(0..k));
    out.padded_point = Some(full);
}

/// eps-fixed point (in ℓ1) of a nonexpansive map of `[0,1]^k` into itself.
///
/// The map is padded to even dimension `k'`, scaled by `1 − eps/(2k')` into
/// a contraction, and that contraction is solved to `eps/2`. The answer is
/// checked with one extra query on the original map, included in the query
/// count but not in the transcript.
pub fn solve_l1_nonexp(oracle: &dyn Oracle, eps: f64) -> Result<L1Outcome> {
    let k = oracle.dim();
    let mut out = match k {
        0 => return Err(Error::contract("dimension must be at least 1")),
        1 => {
            let problem = DaggerProblem::new(BoxSpec::unit(1), eps)?;
            L1Outcome {
                solution: solve_interval_dagger(oracle, &problem)?,
                padded_point: None,
                windows: Vec::new(),
                shrinks: [0, 0],
                round_cap: 0,
            }
        }
        _ if k.is_multiple_of(2) => {
            let scaled = Scaled::to_contraction(oracle, eps)?;
            solve_even(&scaled, eps / 2.0, contraction_gamma(eps, k))?
        }
        _ => {
            let scaled = Scaled::to_contraction(Padded::new(oracle), eps)?;
            let mut out = solve_even(&scaled, eps / 2.0, contraction_gamma(eps, k + 1))?;
            unpad(&mut out, k);
            out
        }
    };
    let x = out.solution.point.clone();
    let fx = oracle.evaluate(&x)?;
    let residual = distance(&fx, &x, NormKind::L1);
    if residual > eps + SLACK {
        return Err(Error::breach(format!(
            "scaled solve returned {x:?} with residual {residual} > {eps} on the original map"
        )));
    }
    out.solution.answer = Some(fx);
    out.solution.stats.queries += 1;
    Ok(out)
}

/// Contraction margin of the scaled map on `k'` (even) coordinates.
pub fn contraction_gamma(eps: f64, padded_k: usize) -> f64 {
    eps / (2.0 * padded_k as f64)
}

/// Whether [`solve_l1_nonexp`] accepts `k` and `eps` under the precision floor.
pub fn nonexp_supported(k: usize, eps: f64) -> bool {
    if k <= 1 {
        return true;
    }
    let kp = k + k % 2;
    deepest_precision(kp, eps / 2.0, contraction_gamma(eps, kp)) >= PRECISION_FLOOR
}
