use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxSpec, NormKind, Point, SLACK};
use crate::real;
use crate::session::Oracle;

/// `coef · x + offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    #[serde(with = "real::vec")]
    pub coef: Vec<f64>,
    #[serde(with = "real::scalar")]
    pub offset: f64,
}

impl AffinePiece {
    fn eval(&self, x: &[f64]) -> f64 {
        self.offset + self.coef.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    fn range(&self) -> (f64, f64) {
        let lo: f64 = self.coef.iter().map(|&a| a.min(0.0)).sum();
        let hi: f64 = self.coef.iter().map(|&a| a.max(0.0)).sum();
        (self.offset + lo, self.offset + hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Max,
    Min,
}

/// One output coordinate of a Shapley-style operator: the max (or min) over
/// a handful of affine pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapleyCoordinate {
    pub op: Extremum,
    pub pieces: Vec<AffinePiece>,
}

impl ShapleyCoordinate {
    fn eval(&self, x: &[f64]) -> f64 {
        let values = self.pieces.iter().map(|p| p.eval(x));
        match self.op {
            Extremum::Max => values.fold(f64::NEG_INFINITY, f64::max),
            Extremum::Min => values.fold(f64::INFINITY, f64::min),
        }
    }
}

/// Serializable description of an oracle map on `[0,1]^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    /// `x ↦ center + factor·(x − center)`.
    Radial {
        center: Point,
        #[serde(with = "real::scalar")]
        factor: f64,
    },
    /// `x ↦ matrix·x + offset`.
    Affine {
        #[serde(with = "real::matrix")]
        matrix: Vec<Vec<f64>>,
        offset: Point,
    },
    Shapley {
        coordinates: Vec<ShapleyCoordinate>,
    },
    /// Componentwise clamp of the inner map's output into `box`.
    Truncated {
        inner: Box<MapSpec>,
        #[serde(rename = "box")]
        clamp: BoxSpec,
    },
    /// `x ↦ factor·inner(x)`.
    Scaled {
        inner: Box<MapSpec>,
        #[serde(with = "real::scalar")]
        factor: f64,
    },
    /// `(x, s) ↦ (inner(x), 0)`.
    Padded {
        inner: Box<MapSpec>,
    },
}

impl MapSpec {
    pub fn dim(&self) -> usize {
        match self {
            MapSpec::Radial { center, .. } => center.dim(),
            MapSpec::Affine { offset, .. } => offset.dim(),
            MapSpec::Shapley { coordinates } => coordinates.len(),
            MapSpec::Truncated { inner, .. } | MapSpec::Scaled { inner, .. } => inner.dim(),
            MapSpec::Padded { inner } => inner.dim() + 1,
        }
    }

    /// Name of the innermost generator family.
    pub fn family(&self) -> &'static str {
        match self {
            MapSpec::Radial { .. } => "radial",
            MapSpec::Affine { .. } => "affine",
            MapSpec::Shapley { .. } => "shapley",
            MapSpec::Truncated { inner, .. }
            | MapSpec::Scaled { inner, .. }
            | MapSpec::Padded { inner } => inner.family(),
        }
    }

    /// Structural checks of the per-variant invariants.
    pub fn validate(&self) -> Result<()> {
        let k = self.dim();
        if k == 0 {
            return Err(Error::contract("map dimension must be at least 1"));
        }
        match self {
            MapSpec::Radial { center, factor } => {
                if !(0.0..1.0).contains(factor) {
                    return Err(Error::contract(format!(
                        "radial factor {factor} not in [0,1)"
                    )));
                }
                if !BoxSpec::unit(k).contains(center, 0.0) {
                    return Err(Error::contract("radial center outside the unit cube"));
                }
            }
            MapSpec::Affine { matrix, offset } => {
                if matrix.len() != offset.dim() || matrix.iter().any(|r| r.len() != offset.dim()) {
                    return Err(Error::contract("affine matrix is not k×k"));
                }
                if matrix.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::contract("affine matrix has non-finite entries"));
                }
            }
            MapSpec::Shapley { coordinates } => {
                for c in coordinates {
                    if c.pieces.is_empty() {
                        return Err(Error::contract("shapley coordinate without pieces"));
                    }
                    if c.pieces.iter().any(|p| p.coef.len() != k) {
                        return Err(Error::contract("shapley piece has wrong arity"));
                    }
                }
            }
            MapSpec::Truncated { inner, clamp } => {
                if clamp.dim() != inner.dim() {
                    return Err(Error::contract("truncation box dimension differs from map"));
                }
                inner.validate()?;
            }
            MapSpec::Scaled { inner, factor } => {
                if !(*factor > 0.0 && *factor <= 1.0) {
                    return Err(Error::contract(format!(
                        "scale factor {factor} not in (0,1]"
                    )));
                }
                inner.validate()?;
            }
            MapSpec::Padded { inner } => inner.validate()?,
        }
        Ok(())
    }

    /// Evaluate without the domain check.
    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            MapSpec::Radial { center, factor } => center
                .iter()
                .zip(x)
                .map(|(c, xi)| c + factor * (xi - c))
                .collect(),
            MapSpec::Affine { matrix, offset } => matrix
                .iter()
                .zip(offset.iter())
                .map(|(row, b)| b + row.iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>())
                .collect(),
            MapSpec::Shapley { coordinates } => coordinates.iter().map(|c| c.eval(x)).collect(),
            MapSpec::Truncated { inner, clamp } => clamp.clamp(&inner.apply(x)).into_vec(),
            MapSpec::Scaled { inner, factor } => {
                inner.apply(x).into_iter().map(|v| factor * v).collect()
            }
            MapSpec::Padded { inner } => {
                let mut v = inner.apply(&x[..x.len() - 1]);
                v.push(0.0);
                v
            }
        }
    }

    /// Deterministic evaluation on the domain `[0,1]^k`.
    pub fn evaluate_map(&self, x: &Point) -> Result<Point> {
        let k = self.dim();
        if x.dim() != k {
            return Err(Error::contract(format!(
                "query of dimension {} for a {k}-dimensional map",
                x.dim()
            )));
        }
        if x.iter().any(|&c| !(-SLACK..=1.0 + SLACK).contains(&c)) {
            return Err(Error::contract(format!(
                "query {x:?} outside the domain [0,1]^{k}"
            )));
        }
        Ok(Point::new(self.apply(x)))
    }

    /// Analytic Lipschitz bound in the given norm.
    pub fn certified_lipschitz(&self, norm: NormKind) -> f64 {
        match self {
            MapSpec::Radial { factor, .. } => *factor,
            MapSpec::Affine { matrix, .. } => match norm {
                NormKind::LInf => matrix
                    .iter()
                    .map(|row| row.iter().map(|a| a.abs()).sum::<f64>())
                    .fold(0.0, f64::max),
                NormKind::L1 => (0..matrix.len())
                    .map(|j| matrix.iter().map(|row| row[j].abs()).sum::<f64>())
                    .fold(0.0, f64::max),
            },
            MapSpec::Shapley { coordinates } => {
                let pieces = || coordinates.iter().flat_map(|c| c.pieces.iter());
                match norm {
                    // Max/min of 1-Lipschitz combinations: bounded by the worst
                    // coefficient ℓ1 mass.
                    NormKind::LInf => pieces()
                        .map(|p| p.coef.iter().map(|a| a.abs()).sum::<f64>())
                        .fold(0.0, f64::max),
                    NormKind::L1 => coordinates
                        .iter()
                        .map(|c| {
                            c.pieces
                                .iter()
                                .flat_map(|p| p.coef.iter())
                                .fold(0.0, |m: f64, a| m.max(a.abs()))
                        })
                        .sum(),
                }
            }
            MapSpec::Truncated { inner, .. } | MapSpec::Padded { inner } => {
                inner.certified_lipschitz(norm)
            }
            MapSpec::Scaled { inner, factor } => factor * inner.certified_lipschitz(norm),
        }
    }

    /// Box guaranteed to contain every output on `[0,1]^k`.
    pub fn range_box(&self) -> BoxSpec {
        let k = self.dim();
        match self {
            MapSpec::Radial { .. } => BoxSpec::unit(k),
            MapSpec::Affine { matrix, offset } => {
                let (lo, hi): (Vec<f64>, Vec<f64>) = matrix
                    .iter()
                    .zip(offset.iter())
                    .map(|(row, &b)| {
                        AffinePiece {
                            coef: row.clone(),
                            offset: b,
                        }
                        .range()
                    })
                    .unzip();
                BoxSpec::new(lo.into(), hi.into()).expect("interval bounds are ordered")
            }
            MapSpec::Shapley { coordinates } => {
                let (lo, hi): (Vec<f64>, Vec<f64>) = coordinates
                    .iter()
                    .map(|c| {
                        let ranges = c.pieces.iter().map(AffinePiece::range);
                        match c.op {
                            Extremum::Max => ranges
                                .fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |(a, b), (l, h)| {
                                    (a.max(l), b.max(h))
                                }),
                            Extremum::Min => ranges
                                .fold((f64::INFINITY, f64::INFINITY), |(a, b), (l, h)| {
                                    (a.min(l), b.min(h))
                                }),
                        }
                    })
                    .unzip();
                BoxSpec::new(lo.into(), hi.into()).expect("interval bounds are ordered")
            }
            MapSpec::Truncated { inner, clamp } => {
                let r = inner.range_box();
                BoxSpec::new(clamp.clamp(r.lower()), clamp.clamp(r.upper()))
                    .expect("clamped bounds are ordered")
            }
            MapSpec::Scaled { inner, factor } => {
                let r = inner.range_box();
                let s = |p: &Point| Point::new(p.iter().map(|v| factor * v).collect());
                BoxSpec::new(s(r.lower()), s(r.upper())).expect("positive scaling keeps order")
            }
            MapSpec::Padded { inner } => {
                let r = inner.range_box();
                BoxSpec::new(r.lower().concat(&[0.0]), r.upper().concat(&[0.0]))
                    .expect("zero side is ordered")
            }
        }
    }
}

impl Oracle for MapSpec {
    fn dim(&self) -> usize {
        MapSpec::dim(self)
    }
    fn evaluate(&self, x: &Point) -> Result<Point> {
        self.evaluate_map(x)
    }
}

/// Clamp the map's output into `clamp`: `g(x)_i = max(min(f(x)_i, hi_i), lo_i)`.
pub fn truncate_map(inner: MapSpec, clamp: BoxSpec) -> Result<MapSpec> {
    if clamp.dim() != inner.dim() {
        return Err(Error::contract("truncation box dimension differs from map"));
    }
    Ok(MapSpec::Truncated {
        inner: Box::new(inner),
        clamp,
    })
}

/// `g(x) = (1 − eps/(2k))·f(x)`: turns an ℓ1-nonexpansive map into a
/// `(1 − eps/(2k))`-contraction whose `eps/2`-fixed points are `eps`-fixed
/// points of `f`.
pub fn scale_to_contraction(inner: MapSpec, eps: f64, k: usize) -> Result<MapSpec> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::contract(format!("eps must be positive, got {eps}")));
    }
    if k != inner.dim() {
        return Err(Error::contract(format!(
            "scaling dimension {k} differs from map dimension {}",
            inner.dim()
        )));
    }
    Ok(MapSpec::Scaled {
        inner: Box::new(inner),
        factor: scale_factor(eps, k),
    })
}

pub(crate) fn scale_factor(eps: f64, k: usize) -> f64 {
    1.0 - eps / (2.0 * k as f64)
}

/// Append a coordinate whose output is identically zero.
pub fn pad_to_even(inner: MapSpec) -> Result<MapSpec> {
    if inner.dim().is_multiple_of(2) {
        return Err(Error::contract("map already has even dimension"));
    }
    Ok(MapSpec::Padded {
        inner: Box::new(inner),
    })
}
