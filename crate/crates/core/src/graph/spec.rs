//! JSON graph specifications.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::law::{BranchingLaw, LawKind};
use crate::graph::lazy::{build_model_tree, graft_ray, LazyGraph};
use crate::graph::vertex::VertexId;

/// A branching law as written in a spec file. `root_valence` may be omitted
/// where a caller supplies a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_valence: Option<u64>,
    #[serde(flatten)]
    pub kind: LawKind,
}

impl LawSpec {
    pub fn to_law(&self, default_root: Option<u64>) -> Result<BranchingLaw> {
        let root = self
            .root_valence
            .or(default_root)
            .ok_or_else(|| Error::Spec("branching: missing field `root_valence`".into()))?;
        BranchingLaw::new(root, self.kind.clone())
    }
}

impl From<&BranchingLaw> for LawSpec {
    fn from(law: &BranchingLaw) -> Self {
        Self {
            root_valence: Some(law.root_valence()),
            kind: law.kind().clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtraChildren {
    pub vertex: VertexId,
    pub count: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphSpec {
    ModelTree {
        branching: LawSpec,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        extra_children: Vec<ExtraChildren>,
    },
    /// A ray glued to a tree; `attach` defaults to the root.
    GraftRay {
        base: Box<GraphSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        attach: Option<VertexId>,
    },
    Explicit {
        edges: Vec<(u64, u64)>,
        root: u64,
        /// Full-graph neighbors beyond the listed edges, keyed by vertex.
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        exterior_degree: BTreeMap<String, usize>,
    },
    ExtraEdges {
        base: Box<GraphSpec>,
        edges: Vec<(VertexId, VertexId)>,
    },
}

impl GraphSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build(&self) -> Result<LazyGraph> {
        match self {
            GraphSpec::ModelTree {
                branching,
                extra_children,
            } => {
                let mut g = build_model_tree(branching.to_law(None)?);
                for extra in extra_children {
                    g = g.with_extra_children(&extra.vertex, extra.count)?;
                }
                Ok(g)
            }
            GraphSpec::GraftRay { base, attach } => {
                let base = base.build()?;
                let attach = attach.clone().unwrap_or_else(|| base.root());
                graft_ray(base, &attach)
            }
            GraphSpec::Explicit {
                edges,
                root,
                exterior_degree,
            } => {
                let exterior = exterior_degree
                    .iter()
                    .map(|(k, &d)| {
                        k.parse::<u64>().map(|v| (v, d)).map_err(|_| {
                            Error::Spec(format!("exterior_degree: key {k:?} is not a vertex index"))
                        })
                    })
                    .collect::<Result<BTreeMap<_, _>>>()?;
                LazyGraph::explicit(edges, *root, &exterior)
            }
            GraphSpec::ExtraEdges { base, edges } => base.build()?.with_extra_edges(edges),
        }
    }

    /// Named graphs: `ray`, `line`, `binary`, `ternary`, `grafted`,
    /// `increasing`, `p3`, `p5`, `star`.
    pub fn preset(name: &str) -> Result<Self> {
        let tree = |root: u64, kind: LawKind| GraphSpec::ModelTree {
            branching: LawSpec {
                root_valence: Some(root),
                kind,
            },
            extra_children: Vec::new(),
        };
        let path = |len: u64, root: u64| GraphSpec::Explicit {
            edges: (0..len - 1).map(|i| (i, i + 1)).collect(),
            root,
            exterior_degree: BTreeMap::from([("0".to_string(), 1), ((len - 1).to_string(), 1)]),
        };
        Ok(match name {
            "ray" => tree(1, LawKind::Constant { value: 1 }),
            "line" => GraphSpec::GraftRay {
                base: Box::new(tree(1, LawKind::Constant { value: 1 })),
                attach: None,
            },
            "binary" => tree(3, LawKind::Constant { value: 2 }),
            "ternary" => tree(4, LawKind::Constant { value: 3 }),
            "grafted" => GraphSpec::GraftRay {
                base: Box::new(tree(2, LawKind::Exponential { base: 2, scale: 1 })),
                attach: None,
            },
            "increasing" => tree(
                3,
                LawKind::Affine {
                    slope: 1,
                    intercept: 2,
                },
            ),
            "p3" => path(3, 1),
            "p5" => path(5, 2),
            // Radius-2 ball of the binary tree; its interior is the star K_{1,3}.
            "star" => GraphSpec::Explicit {
                edges: vec![
                    (0, 1),
                    (0, 2),
                    (0, 3),
                    (1, 4),
                    (1, 5),
                    (2, 6),
                    (2, 7),
                    (3, 8),
                    (3, 9),
                ],
                root: 0,
                exterior_degree: (4..10).map(|v: u64| (v.to_string(), 2)).collect(),
            },
            other => return Err(Error::Spec(format!("unknown preset {other:?}"))),
        })
    }
}
