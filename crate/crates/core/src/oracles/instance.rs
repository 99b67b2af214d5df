use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{Point, ProblemSpec};
use crate::real::to_text;

use super::map::MapSpec;

/// On-disk instance: problem parameters, the map, and its fixed point when
/// known analytically. Reals are written as decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub problem: ProblemSpec,
    pub map: MapSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_fixed_point: Option<Point>,
    pub seed: u64,
}

impl InstanceFile {
    /// Stable identifier, e.g. `radial-k4-l1-g0.5-s7`.
    pub fn id(&self) -> String {
        let gamma = self
            .problem
            .gamma
            .map_or_else(|| "ne".to_string(), |g| format!("g{}", to_text(g)));
        format!(
            "{}-k{}-{}-{}-s{}",
            self.map.family(),
            self.problem.k,
            self.problem.norm,
            gamma,
            self.seed
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: InstanceFile = serde_json::from_str(text)?;
        inst.problem.validate()?;
        inst.map.validate()?;
        if inst.map.dim() != inst.problem.k {
            return Err(crate::Error::contract(format!(
                "map dimension {} differs from problem k {}",
                inst.map.dim(),
                inst.problem.k
            )));
        }
        Ok(inst)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
