use crate::error::{Error, Result};
use crate::geometry::{distance, BoxSpec, NormKind, Point, SLACK};
use crate::session::{drive, Machine, Oracle, Session, Solution, Step};

use super::report::{ViolationKind, ViolationReport, Witness};

/// `⌈log(diam/eps) / −log(1−γ)⌉ + 2` with `diam` the cube's diameter.
pub fn banach_cap(k: usize, eps: f64, gamma: f64, norm: NormKind) -> usize {
    let diam = norm.cube_diameter(k);
    let rate = -(1.0 - gamma).ln();
    let steps = (diam / eps).ln() / rate;
    let steps = if steps.is_finite() {
        steps.ceil().max(0.0) as usize
    } else {
        0
    };
    steps + 2
}

/// Value iteration `x ← f(x)`.
struct BanachMachine {
    domain: BoxSpec,
    eps: f64,
    gamma: f64,
    norm: NormKind,
    x: Point,
    cap: usize,
    queries: usize,
}

impl Machine for BanachMachine {
    fn start(&mut self) -> Result<Step> {
        Ok(Step::Query(self.x.clone()))
    }

    fn resume(&mut self, answer: Point) -> Result<Step> {
        self.queries += 1;
        let residual = distance(&answer, &self.x, self.norm);
        if residual <= self.eps + SLACK {
            return Ok(Step::Done(self.x.clone()));
        }
        if self.queries >= self.cap {
            return Err(ViolationReport {
                kind: ViolationKind::Lipschitz,
                witness: Witness::Iterations {
                    count: self.queries,
                },
                measured: residual,
                required: self.eps,
                detail: format!(
                    "value iteration did not reach eps within {} steps; \
                     map is not a {}-contraction",
                    self.cap,
                    1.0 - self.gamma
                ),
            }
            .into());
        }
        // Iterates stay in the cube; clamp away rounding at the faces.
        self.x = self.domain.clamp(&answer);
        Ok(Step::Query(self.x.clone()))
    }

    fn query_box(&self) -> &BoxSpec {
        &self.domain
    }

    fn answer_box(&self) -> &BoxSpec {
        &self.domain
    }

    fn rounds(&self) -> usize {
        self.queries
    }
}

/// Iterate a `(1−γ)`-contraction of `[0,1]^k` from `x0` until the residual
/// is at most `eps`.
pub fn banach_iterate(
    oracle: &dyn Oracle,
    eps: f64,
    gamma: f64,
    x0: Point,
    norm: NormKind,
) -> Result<Solution> {
    let k = oracle.dim();
    if x0.dim() != k {
        return Err(Error::contract(
            "starting point dimension differs from oracle",
        ));
    }
    if eps.is_nan() || eps <= 0.0 || gamma.is_nan() || gamma <= 0.0 || gamma > 1.0 {
        return Err(Error::contract(format!(
            "need eps > 0 and gamma in (0,1], got {eps}, {gamma}"
        )));
    }
    let domain = BoxSpec::unit(k);
    if !domain.contains(&x0, 0.0) {
        return Err(Error::contract("starting point outside the unit cube"));
    }
    let machine = BanachMachine {
        cap: banach_cap(k, eps, gamma, norm),
        domain,
        eps,
        gamma,
        norm,
        x: x0,
        queries: 0,
    };
    let mut session = Session::start(Box::new(machine))?;
    drive(&mut session, oracle)
}
