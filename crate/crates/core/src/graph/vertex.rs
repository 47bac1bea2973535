use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Vertex identifier that is stable across materializations.
///
/// Tree vertices are named by the child indices along the path from the root,
/// so two balls of different radii agree on every shared vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexId {
    /// Child-index path from the root of a model tree; empty for the root.
    Path(Vec<u32>),
    /// `step`-th vertex (1-based) of the ray added by the `level`-th graft.
    Ray { level: u32, step: u64 },
    /// Vertex of an explicitly listed graph.
    Index(u64),
}

impl VertexId {
    pub fn root_path() -> Self {
        VertexId::Path(Vec::new())
    }

    pub fn path(indices: &[u32]) -> Self {
        VertexId::Path(indices.to_vec())
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Path(p) => {
                if p.is_empty() {
                    return write!(f, "/");
                }
                for i in p {
                    write!(f, "/{i}")?;
                }
                Ok(())
            }
            VertexId::Ray { level, step } => write!(f, "ray{level}:{step}"),
            VertexId::Index(i) => write!(f, "{i}"),
        }
    }
}

impl FromStr for VertexId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Spec(format!("cannot parse vertex id {s:?}"));
        if let Some(rest) = s.strip_prefix('/') {
            if rest.is_empty() {
                return Ok(VertexId::Path(Vec::new()));
            }
            let path = rest
                .split('/')
                .map(|p| p.parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(VertexId::Path(path))
        } else if let Some(rest) = s.strip_prefix("ray") {
            let (level, step) = rest.split_once(':').ok_or_else(bad)?;
            Ok(VertexId::Ray {
                level: level.parse().map_err(|_| bad())?,
                step: step.parse().map_err(|_| bad())?,
            })
        } else {
            s.parse::<u64>().map(VertexId::Index).map_err(|_| bad())
        }
    }
}

impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(i) => Ok(VertexId::Index(i)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn display_forms() {
        assert_eq!(VertexId::root_path().to_string(), "/");
        assert_eq!(VertexId::path(&[0, 2]).to_string(), "/0/2");
        assert_eq!(VertexId::Ray { level: 1, step: 4 }.to_string(), "ray1:4");
        assert_eq!(VertexId::Index(7).to_string(), "7");
        assert!("ray1".parse::<VertexId>().is_err());
        assert!("/a".parse::<VertexId>().is_err());
    }

    proptest! {
        #[test]
        fn parse_inverts_display(path in proptest::collection::vec(0u32..50, 0..6),
                                 level in 1u32..4, step in 1u64..1000, idx in 0u64..10_000) {
            for id in [VertexId::Path(path.clone()), VertexId::Ray { level, step }, VertexId::Index(idx)] {
                prop_assert_eq!(id.to_string().parse::<VertexId>().unwrap(), id.clone());
                let json = serde_json::to_string(&id).unwrap();
                prop_assert_eq!(serde_json::from_str::<VertexId>(&json).unwrap(), id);
            }
        }
    }
}
