use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    Lipschitz,
    TranscriptConsistency,
    Residual,
    RangeBox,
}

/// What exhibits the violation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    Pair { x: Point, y: Point },
    Rounds { r: usize, t: usize },
    Point { x: Point },
    Iterations { count: usize },
}

/// A measured quantity that exceeded what the contract allows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub kind: ViolationKind,
    pub witness: Witness,
    #[serde(with = "real::scalar")]
    pub measured: f64,
    #[serde(with = "real::scalar")]
    pub required: f64,
    pub detail: String,
}

impl ViolationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} violation: measured {} > required {} ({})",
            self.kind, self.measured, self.required, self.detail
        )
    }
}
