//! Serde adapters that write reals as decimal strings.
//!
//! `f64`'s `Display` prints the shortest decimal that parses back to the same
//! bits (at most 17 significant digits), so files round-trip exactly.
//! Readers also accept bare JSON numbers.

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::Deserialize;

pub(crate) fn to_text(x: f64) -> String {
    format!("{x}")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RealRepr {
    Text(String),
    Number(f64),
}

impl RealRepr {
    fn value<E: de::Error>(self) -> Result<f64, E> {
        let v = match self {
            RealRepr::Text(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|e| E::custom(format!("bad real `{s}`: {e}")))?,
            RealRepr::Number(v) => v,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(E::custom("non-finite real"))
        }
    }
}

pub mod scalar {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_text(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        RealRepr::deserialize(d)?.value()
    }
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&to_text(*v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<RealRepr>::deserialize(d)?
            .map(RealRepr::value)
            .transpose()
    }
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&to_text(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<RealRepr>::deserialize(d)?
            .into_iter()
            .map(RealRepr::value)
            .collect()
    }
}

pub mod matrix {
    use super::*;

    struct Row<'a>(&'a [f64]);

    impl serde::Serialize for Row<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            super::vec::serialize(self.0, s)
        }
    }

    pub fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(rows.len()))?;
        for r in rows {
            seq.serialize_element(&Row(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        Vec::<Vec<RealRepr>>::deserialize(d)?
            .into_iter()
            .map(|row| row.into_iter().map(RealRepr::value).collect())
            .collect()
    }
}
