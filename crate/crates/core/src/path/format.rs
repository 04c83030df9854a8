//! JSON wire format for paths and ensembles.
//!
//! ```json
//! {"components": [{"interval": [0.0, "inf"]}, {"point": 5.0}],
//!  "breakpoints": [[0.0, 0.0, 1.0], [5.0, 2.0, 2.0]],
//!  "tails": {"upper": 1.0}}
//! ```
//!
//! Infinite values are written as the strings `"inf"` and `"-inf"`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Breakpoint, CadlagPath, DomainComponent, PathEnsemble, Tails};
use crate::{Error, Result};

/// An extended real on the wire: a JSON number or an infinity sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtRealJson(pub f64);

impl Serialize for ExtRealJson {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtRealJson {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Sym(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(ExtRealJson(x)),
            Raw::Sym(s) => match s.as_str() {
                "inf" | "+inf" => Ok(ExtRealJson(f64::INFINITY)),
                "-inf" => Ok(ExtRealJson(f64::NEG_INFINITY)),
                other => Err(serde::de::Error::custom(format!("expected number or \"inf\"/\"-inf\", got {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentJson {
    Point(ExtRealJson),
    Interval([ExtRealJson; 2]),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TailsJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<ExtRealJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<ExtRealJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathJson {
    pub components: Vec<ComponentJson>,
    pub breakpoints: Vec<[ExtRealJson; 3]>,
    #[serde(default)]
    pub tails: TailsJson,
}

impl From<&CadlagPath> for PathJson {
    fn from(p: &CadlagPath) -> Self {
        PathJson {
            components: p
                .components()
                .iter()
                .map(|c| match *c {
                    DomainComponent::Point(t) => ComponentJson::Point(ExtRealJson(t)),
                    DomainComponent::Interval { lo, hi } => {
                        ComponentJson::Interval([ExtRealJson(lo), ExtRealJson(hi)])
                    }
                })
                .collect(),
            breakpoints: p
                .breakpoints()
                .iter()
                .map(|b| [ExtRealJson(b.t), ExtRealJson(b.left), ExtRealJson(b.right)])
                .collect(),
            tails: TailsJson {
                lower: p.tails().lower.map(ExtRealJson),
                upper: p.tails().upper.map(ExtRealJson),
            },
        }
    }
}

impl PathJson {
    /// Converts to a path without validation.
    pub fn into_raw(self) -> CadlagPath {
        CadlagPath::from_raw(
            self.components
                .into_iter()
                .map(|c| match c {
                    ComponentJson::Point(t) => DomainComponent::Point(t.0),
                    ComponentJson::Interval([lo, hi]) => DomainComponent::Interval { lo: lo.0, hi: hi.0 },
                })
                .collect(),
            self.breakpoints
                .into_iter()
                .map(|[t, l, r]| Breakpoint::new(t.0, l.0, r.0))
                .collect(),
            Tails {
                lower: self.tails.lower.map(|x| x.0),
                upper: self.tails.upper.map(|x| x.0),
            },
        )
    }
}

impl TryFrom<PathJson> for CadlagPath {
    type Error = Error;

    fn try_from(j: PathJson) -> Result<Self> {
        let p = j.into_raw();
        p.validate().map_err(Error::InvalidPath)?;
        Ok(p)
    }
}

impl Serialize for CadlagPath {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PathJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CadlagPath {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PathJson::deserialize(d)?;
        CadlagPath::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedPathJson {
    pub id: String,
    pub path: CadlagPath,
}

#[derive(Serialize, Deserialize)]
struct EnsembleJson {
    paths: Vec<NamedPathJson>,
}

impl Serialize for PathEnsemble {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EnsembleJson {
            paths: self
                .iter()
                .map(|(id, p)| NamedPathJson {
                    id: id.to_string(),
                    path: p.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PathEnsemble {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let e = EnsembleJson::deserialize(d)?;
        let (ids, paths) = e.paths.into_iter().map(|n| (n.id, n.path)).unzip();
        PathEnsemble::with_ids(ids, paths).map_err(serde::de::Error::custom)
    }
}

impl CadlagPath {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("path serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl PathEnsemble {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ensemble serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
