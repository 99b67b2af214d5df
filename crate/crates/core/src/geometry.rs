//! Points, norms and axis-aligned boxes.

use std::fmt;
use std::ops::{Deref, Index};
use std::slice::SliceIndex;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real;

/// Absolute slack applied to every inequality that gates control flow.
pub const SLACK: f64 = 1e-12;

/// A point of `R^k` with finite coordinates.
#[derive(Clone, PartialEq, Default)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        debug_assert!(
            coords.iter().all(|c| c.is_finite()),
            "non-finite coordinate"
        );
        Point(coords)
    }

    /// Validating constructor for data that crosses a trust boundary.
    pub fn try_new(coords: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::contract(format!("non-finite coordinate {bad}")));
        }
        Ok(Point(coords))
    }

    pub fn splat(value: f64, dim: usize) -> Self {
        Point::new(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Concatenation `(self, tail)`.
    pub fn concat(&self, tail: &[f64]) -> Point {
        let mut v = Vec::with_capacity(self.dim() + tail.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(tail);
        Point(v)
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Point {
        Point(self.0[range].to_vec())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Bitwise equality, used to recognise a point the solver already queried.
    pub fn same_bits(&self, other: &Point) -> bool {
        self.dim() == other.dim()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl<I: SliceIndex<[f64]>> Index<I> for Point {
    type Output = I::Output;
    fn index(&self, i: I) -> &I::Output {
        &self.0[i]
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point::new(v)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Point::new(v.to_vec())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Point").field(&self.0).finish()
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        real::vec::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = real::vec::deserialize(d)?;
        Point::try_new(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    #[serde(rename = "linf")]
    LInf,
    #[serde(rename = "l1")]
    L1,
}

impl NormKind {
    pub fn of(self, v: impl IntoIterator<Item = f64>) -> f64 {
        match self {
            NormKind::LInf => v.into_iter().fold(0.0, |m, c| f64::max(m, c.abs())),
            NormKind::L1 => v.into_iter().map(f64::abs).sum(),
        }
    }

    /// Diameter of the unit cube `[0,1]^k` in this norm.
    pub fn cube_diameter(self, k: usize) -> f64 {
        match self {
            NormKind::LInf => 1.0,
            NormKind::L1 => k as f64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::LInf => "linf",
            NormKind::L1 => "l1",
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linf" | "l-inf" | "inf" => Ok(NormKind::LInf),
            "l1" => Ok(NormKind::L1),
            other => Err(Error::contract(format!("unknown norm `{other}`"))),
        }
    }
}

/// `‖x − y‖` in the given norm.
pub fn norm_distance(x: &[f64], y: &[f64], norm: NormKind) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::contract(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(distance(x, y, norm))
}

pub(crate) fn distance(x: &[f64], y: &[f64], norm: NormKind) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    norm.of(x.iter().zip(y).map(|(a, b)| a - b))
}

/// Axis-aligned box `{x : lower ⪯ x ⪯ upper}`. Degenerate sides are allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    lower: Point,
    upper: Point,
}

impl BoxSpec {
    pub fn new(lower: Point, upper: Point) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::contract("box corners differ in dimension"));
        }
        if lower.dim() == 0 {
            return Err(Error::contract("box dimension must be at least 1"));
        }
        if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::contract(format!(
                "box lower exceeds upper on coordinate {i}: {} > {}",
                lower[i], upper[i]
            )));
        }
        Ok(BoxSpec { lower, upper })
    }

    pub fn unit(k: usize) -> Self {
        BoxSpec {
            lower: Point::splat(0.0, k),
            upper: Point::splat(1.0, k),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> &Point {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Containment with absolute slack `tol` per coordinate.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .enumerate()
                .all(|(i, &c)| c >= self.lower[i] - tol && c <= self.upper[i] + tol)
    }

    pub fn is_subset_of(&self, other: &BoxSpec, tol: f64) -> bool {
        self.dim() == other.dim()
            && other.contains(&self.lower, tol)
            && other.contains(&self.upper, tol)
    }

    /// Componentwise clamp into the box.
    pub fn clamp(&self, x: &[f64]) -> Point {
        Point::new(
            x.iter()
                .enumerate()
                .map(|(i, &c)| c.min(self.upper[i]).max(self.lower[i]))
                .collect(),
        )
    }

    pub fn midpoint(&self) -> Point {
        Point::new(
            self.lower
                .iter()
                .zip(self.upper.iter())
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        )
    }

    /// Sub-box on the coordinate range.
    pub fn project(&self, range: std::ops::Range<usize>) -> BoxSpec {
        BoxSpec {
            lower: self.lower.slice(range.clone()),
            upper: self.upper.slice(range),
        }
    }

    /// Cartesian product `self × other`.
    pub fn product(&self, other: &BoxSpec) -> BoxSpec {
        BoxSpec {
            lower: self.lower.concat(&other.lower),
            upper: self.upper.concat(&other.upper),
        }
    }
}

/// `B(lower, upper, ±eps)`: every side pushed out by `eps`.
pub fn inflate(b: &BoxSpec, eps: f64) -> Result<BoxSpec> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::contract(format!(
            "inflation must be non-negative, got {eps}"
        )));
    }
    Ok(BoxSpec {
        lower: Point::new(b.lower.iter().map(|c| c - eps).collect()),
        upper: Point::new(b.upper.iter().map(|c| c + eps).collect()),
    })
}

/// Dimension, precision and domain of one fixed-point problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub k: usize,
    #[serde(with = "real::scalar")]
    pub eps: f64,
    /// Contraction margin; absent for nonexpansive problems.
    #[serde(
        with = "real::option",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub gamma: Option<f64>,
    pub norm: NormKind,
    #[serde(rename = "box")]
    pub domain: BoxSpec,
}

impl ProblemSpec {
    pub fn new(k: usize, eps: f64, gamma: Option<f64>, norm: NormKind) -> Result<Self> {
        let spec = ProblemSpec {
            k,
            eps,
            gamma,
            norm,
            domain: BoxSpec::unit(k.max(1)),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::contract("dimension must be at least 1"));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::contract(format!(
                "eps must lie in (0,1], got {}",
                self.eps
            )));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::contract(format!("gamma must lie in (0,1], got {g}")));
            }
        }
        if self.domain.dim() != self.k {
            return Err(Error::contract("domain box dimension differs from k"));
        }
        Ok(())
    }
}
