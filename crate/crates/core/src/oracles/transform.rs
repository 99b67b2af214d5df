//! The map transformations as wrappers around an arbitrary [`Oracle`].
//!
//! [`MapSpec`](super::MapSpec) has serializable counterparts of these; the
//! wrappers let solvers apply them to closures and foreign oracles. Each
//! wrapped evaluation costs exactly one evaluation of the inner oracle.

use crate::error::{Error, Result};
use crate::geometry::{BoxSpec, Point};
use crate::session::Oracle;

use super::map::scale_factor;

pub struct Truncated<O> {
    inner: O,
    clamp: BoxSpec,
}

impl<O: Oracle> Truncated<O> {
    pub fn new(inner: O, clamp: BoxSpec) -> Result<Self> {
        if clamp.dim() != inner.dim() {
            return Err(Error::contract(
                "truncation box dimension differs from oracle",
            ));
        }
        Ok(Truncated { inner, clamp })
    }
}

impl<O: Oracle> Oracle for Truncated<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn evaluate(&self, x: &Point) -> Result<Point> {
        Ok(self.clamp.clamp(&self.inner.evaluate(x)?))
    }
}

/// `x ↦ factor · inner(x)`.
pub struct Scaled<O> {
    inner: O,
    factor: f64,
}

impl<O: Oracle> Scaled<O> {
    /// The contraction `(1 − eps/(2k))·f` for a `k`-dimensional oracle.
    pub fn to_contraction(inner: O, eps: f64) -> Result<Self> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::contract(format!("eps must be positive, got {eps}")));
        }
        let factor = scale_factor(eps, inner.dim());
        Ok(Scaled { inner, factor })
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }
}

impl<O: Oracle> Oracle for Scaled<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn evaluate(&self, x: &Point) -> Result<Point> {
        let y = self.inner.evaluate(x)?;
        Ok(Point::new(y.iter().map(|v| self.factor * v).collect()))
    }
}

/// `(x, s) ↦ (inner(x), 0)`.
pub struct Padded<O> {
    inner: O,
}

impl<O: Oracle> Padded<O> {
    pub fn new(inner: O) -> Self {
        Padded { inner }
    }
}

impl<O: Oracle> Oracle for Padded<O> {
    fn dim(&self) -> usize {
        self.inner.dim() + 1
    }
    fn evaluate(&self, x: &Point) -> Result<Point> {
        if x.dim() != self.dim() {
            return Err(Error::contract(
                "query dimension differs from padded dimension",
            ));
        }
        let y = self.inner.evaluate(&x.slice(0..x.dim() - 1))?;
        Ok(y.concat(&[0.0]))
    }
}
