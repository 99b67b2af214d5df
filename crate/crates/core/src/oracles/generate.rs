//! Seeded generators for certified instances.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxSpec, NormKind, Point, ProblemSpec};

use super::instance::InstanceFile;
use super::map::{truncate_map, AffinePiece, Extremum, MapSpec, ShapleyCoordinate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapFamily {
    Radial,
    Affine,
    Shapley,
}

impl MapFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            MapFamily::Radial => "radial",
            MapFamily::Affine => "affine",
            MapFamily::Shapley => "shapley",
        }
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MapFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "radial" => Ok(MapFamily::Radial),
            "affine" => Ok(MapFamily::Affine),
            "shapley" => Ok(MapFamily::Shapley),
            other => Err(Error::contract(format!("unknown family `{other}`"))),
        }
    }
}

/// Largest dimension the generators accept.
pub const MAX_GENERATED_DIM: usize = 12;

/// Build a reproducible instance. `gamma = None` asks for a nonexpansive map
/// (Lipschitz bound 1); otherwise the certified bound is `1 − gamma`.
pub fn generate_instance(
    seed: u64,
    family: MapFamily,
    k: usize,
    eps: f64,
    gamma: Option<f64>,
    norm: NormKind,
) -> Result<InstanceFile> {
    if k == 0 || k > MAX_GENERATED_DIM {
        return Err(Error::contract(format!(
            "dimension {k} outside 1..={MAX_GENERATED_DIM}"
        )));
    }
    let problem = ProblemSpec::new(k, eps, gamma, norm)?;
    let lipschitz = 1.0 - gamma.unwrap_or(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (map, known) = match family {
        MapFamily::Radial => {
            if gamma.is_none() {
                return Err(Error::Incompatible(
                    "radial maps are contractions; a gamma in (0,1] is required".into(),
                ));
            }
            let center = Point::new((0..k).map(|_| rng.gen::<f64>()).collect());
            (
                MapSpec::Radial {
                    center: center.clone(),
                    factor: lipschitz,
                },
                Some(center),
            )
        }
        MapFamily::Affine => (affine(&mut rng, k, lipschitz, norm)?, None),
        MapFamily::Shapley => (shapley(&mut rng, k, lipschitz, norm), None),
    };

    let certified = map.certified_lipschitz(norm);
    if certified > lipschitz {
        return Err(Error::Incompatible(format!(
            "certified {norm} Lipschitz bound {certified} exceeds required {lipschitz}"
        )));
    }
    map.validate()?;
    Ok(InstanceFile {
        problem,
        map,
        known_fixed_point: known,
        seed,
    })
}

/// Matrix with every row (ℓ∞) or column (ℓ1) of absolute sum at most
/// `lipschitz`, wrapped in truncation to the unit cube.
fn affine(rng: &mut ChaCha8Rng, k: usize, lipschitz: f64, norm: NormKind) -> Result<MapSpec> {
    let mut lines: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let mass: f64 = raw.iter().map(|a| a.abs()).sum();
            let target = lipschitz * rng.gen_range(0.5..=1.0);
            let scale = if mass > 0.0 { target / mass } else { 0.0 };
            raw.into_iter().map(|a| a * scale).collect()
        })
        .collect();
    // Rounding can push a sum a few ulps past the bound; shrink until the
    // exact float sum is within it.
    for line in &mut lines {
        let mut tries = 0;
        while line.iter().map(|a| a.abs()).sum::<f64>() > lipschitz {
            tries += 1;
            if tries > 64 {
                return Err(Error::Incompatible("could not certify affine bound".into()));
            }
            line.iter_mut().for_each(|a| *a *= 1.0 - 1e-12);
        }
    }
    let matrix = match norm {
        NormKind::LInf => lines,
        NormKind::L1 => (0..k)
            .map(|i| (0..k).map(|j| lines[j][i]).collect())
            .collect(),
    };
    // Anchor the centre of the cube at a random point so truncation is
    // moderate.
    let offset = Point::new(
        (0..k)
            .map(|i| rng.gen::<f64>() - 0.5 * matrix[i].iter().sum::<f64>())
            .collect(),
    );
    truncate_map(MapSpec::Affine { matrix, offset }, BoxSpec::unit(k))
}

/// Per coordinate: max or min over 2..=4 nonnegative affine pieces. Offsets
/// are chosen so every piece maps the cube into `[0,1]`.
fn shapley(rng: &mut ChaCha8Rng, k: usize, lipschitz: f64, norm: NormKind) -> MapSpec {
    let coordinates = (0..k)
        .map(|_| {
            let op = if rng.gen::<bool>() {
                Extremum::Max
            } else {
                Extremum::Min
            };
            let n = rng.gen_range(2..=4);
            let pieces = (0..n)
                .map(|_| {
                    let coef: Vec<f64> = match norm {
                        NormKind::LInf => {
                            let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
                            let mass: f64 = raw.iter().sum();
                            let target = lipschitz * rng.gen_range(0.5..=1.0);
                            raw.into_iter()
                                .map(|a| {
                                    if mass > 0.0 {
                                        a * target / mass * (1.0 - 1e-12)
                                    } else {
                                        0.0
                                    }
                                })
                                .collect()
                        }
                        NormKind::L1 => (0..k)
                            .map(|_| rng.gen::<f64>() * lipschitz / k as f64 * (1.0 - 1e-12))
                            .collect(),
                    };
                    let mass: f64 = coef.iter().sum();
                    let offset = rng.gen::<f64>() * (1.0 - mass).max(0.0);
                    AffinePiece { coef, offset }
                })
                .collect();
            ShapleyCoordinate { op, pieces }
        })
        .collect();
    MapSpec::Shapley { coordinates }
}
