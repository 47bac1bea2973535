//! Lazily evaluated, possibly infinite, locally finite rooted graphs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::law::{BranchingLaw, SumClass};
use crate::graph::vertex::VertexId;

/// User-supplied neighbor oracle for graphs outside the built-in families.
///
/// Implementations must be pure: the same vertex always yields the same
/// neighbors in the same order.
pub trait NeighborOracle: fmt::Debug + Send + Sync {
    fn root(&self) -> VertexId;
    /// `None` for ids that are not vertices of the graph.
    fn neighbors(&self, v: &VertexId) -> Option<Vec<VertexId>>;
    fn is_tree(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug)]
pub struct ModelTree {
    law: BranchingLaw,
    /// Additional children at individual vertices; their descendants follow the law.
    extra_children: BTreeMap<Vec<u32>, u32>,
}

#[derive(Clone, Debug)]
pub struct GraftRay {
    base: Box<LazyGraph>,
    attach: VertexId,
    level: u32,
}

#[derive(Clone, Debug)]
pub struct ExplicitGraph {
    root: u64,
    adjacency: BTreeMap<u64, Vec<u64>>,
    exterior: BTreeMap<u64, usize>,
}

#[derive(Clone, Debug)]
pub struct ExtraEdges {
    base: Box<LazyGraph>,
    edges: Vec<(VertexId, VertexId)>,
    extra: HashMap<VertexId, Vec<VertexId>>,
}

#[derive(Clone, Debug)]
pub enum Family {
    ModelTree(ModelTree),
    GraftRay(GraftRay),
    Explicit(ExplicitGraph),
    ExtraEdges(ExtraEdges),
    Custom(Arc<dyn NeighborOracle>),
}

/// Rooted, locally finite graph given by a neighbor oracle.
///
/// Immutable after construction; all queries are pure.
#[derive(Clone, Debug)]
pub struct LazyGraph {
    family: Family,
}

/// Model tree with the given branching law.
pub fn build_model_tree(law: BranchingLaw) -> LazyGraph {
    LazyGraph {
        family: Family::ModelTree(ModelTree {
            law,
            extra_children: BTreeMap::new(),
        }),
    }
}

/// Attach an infinite path `attach ~ ray:1 ~ ray:2 ~ ...` to a tree.
pub fn graft_ray(base: LazyGraph, attach: &VertexId) -> Result<LazyGraph> {
    if !base.is_tree() {
        return Err(Error::NotATree);
    }
    if !base.contains(attach) {
        return Err(Error::UnknownVertex(attach.clone()));
    }
    let level = base.max_ray_level() + 1;
    Ok(LazyGraph {
        family: Family::GraftRay(GraftRay {
            base: Box::new(base),
            attach: attach.clone(),
            level,
        }),
    })
}

impl LazyGraph {
    /// Finite graph from an edge list. `exterior` records, per vertex, how many
    /// further neighbors it has in the full graph beyond the listed edges.
    pub fn explicit(
        edges: &[(u64, u64)],
        root: u64,
        exterior: &BTreeMap<u64, usize>,
    ) -> Result<Self> {
        let mut adjacency: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        adjacency.entry(root).or_default();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            if adjacency.get(&a).is_some_and(|n| n.contains(&b)) {
                return Err(Error::InvalidGraph(format!("duplicate edge {a}-{b}")));
            }
            adjacency.entry(a).or_default().push(b);
            adjacency.entry(b).or_default().push(a);
        }
        for &v in exterior.keys() {
            adjacency.entry(v).or_default();
        }
        let exterior = exterior
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(&v, &d)| (v, d))
            .collect();
        Ok(Self {
            family: Family::Explicit(ExplicitGraph {
                root,
                adjacency,
                exterior,
            }),
        })
    }

    pub fn custom(oracle: Arc<dyn NeighborOracle>) -> Self {
        Self {
            family: Family::Custom(oracle),
        }
    }

    /// Give `vertex` of a model tree `count` extra children, each rooting a
    /// subtree that follows the branching law from its depth on.
    pub fn with_extra_children(self, vertex: &VertexId, count: u32) -> Result<Self> {
        if !self.contains(vertex) {
            return Err(Error::UnknownVertex(vertex.clone()));
        }
        match (self.family, vertex) {
            (Family::ModelTree(mut tree), VertexId::Path(path)) => {
                *tree.extra_children.entry(path.clone()).or_insert(0) += count;
                Ok(Self {
                    family: Family::ModelTree(tree),
                })
            }
            _ => Err(Error::InvalidGraph(
                "extra children can only be added to model-tree vertices".into(),
            )),
        }
    }

    /// Add edges between existing vertices.
    pub fn with_extra_edges(self, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut extra: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        for (a, b) in edges {
            for v in [a, b] {
                if !self.contains(v) {
                    return Err(Error::UnknownVertex(v.clone()));
                }
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            let existing = self.neighbors(a)?;
            if existing.contains(b) || extra.get(a).is_some_and(|n| n.contains(b)) {
                return Err(Error::InvalidGraph(format!("duplicate edge {a}-{b}")));
            }
            extra.entry(a.clone()).or_default().push(b.clone());
            extra.entry(b.clone()).or_default().push(a.clone());
        }
        Ok(Self {
            family: Family::ExtraEdges(ExtraEdges {
                base: Box::new(self),
                edges: edges.to_vec(),
                extra,
            }),
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn root(&self) -> VertexId {
        match &self.family {
            Family::ModelTree(_) => VertexId::root_path(),
            Family::GraftRay(g) => g.base.root(),
            Family::Explicit(g) => VertexId::Index(g.root),
            Family::ExtraEdges(g) => g.base.root(),
            Family::Custom(o) => o.root(),
        }
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        match (&self.family, v) {
            (Family::ModelTree(t), VertexId::Path(path)) => {
                (0..path.len()).all(|depth| match t.child_count_f64(&path[..depth]) {
                    Some(count) => (path[depth] as f64) < count,
                    None => false,
                })
            }
            (Family::ModelTree(_), _) => false,
            (Family::GraftRay(g), VertexId::Ray { level, step }) if *level == g.level => *step >= 1,
            (Family::GraftRay(g), _) => g.base.contains(v),
            (Family::Explicit(g), VertexId::Index(i)) => g.adjacency.contains_key(i),
            (Family::Explicit(_), _) => false,
            (Family::ExtraEdges(g), _) => g.base.contains(v),
            (Family::Custom(o), _) => o.neighbors(v).is_some(),
        }
    }

    /// Neighbors of `v` in the full graph, in a fixed order. Neighbors of
    /// explicit graphs recorded only through `exterior_degree` are not listed.
    pub fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v.clone()));
        }
        match (&self.family, v) {
            (Family::ModelTree(t), VertexId::Path(path)) => {
                let count = t.child_count(path)?;
                let count = u32::try_from(count).map_err(|_| {
                    Error::InvalidGraph(format!("vertex {v} has too many children to list"))
                })?;
                let mut out = Vec::with_capacity(count as usize + 1);
                if !path.is_empty() {
                    out.push(VertexId::Path(path[..path.len() - 1].to_vec()));
                }
                for c in 0..count {
                    let mut child = path.clone();
                    child.push(c);
                    out.push(VertexId::Path(child));
                }
                Ok(out)
            }
            (Family::GraftRay(g), VertexId::Ray { level, step }) if *level == g.level => {
                let prev = if *step == 1 {
                    g.attach.clone()
                } else {
                    VertexId::Ray {
                        level: *level,
                        step: step - 1,
                    }
                };
                Ok(vec![
                    prev,
                    VertexId::Ray {
                        level: *level,
                        step: step + 1,
                    },
                ])
            }
            (Family::GraftRay(g), _) => {
                let mut out = g.base.neighbors(v)?;
                if *v == g.attach {
                    out.push(VertexId::Ray {
                        level: g.level,
                        step: 1,
                    });
                }
                Ok(out)
            }
            (Family::Explicit(g), VertexId::Index(i)) => {
                Ok(g.adjacency[i].iter().map(|&j| VertexId::Index(j)).collect())
            }
            (Family::ExtraEdges(g), _) => {
                let mut out = g.base.neighbors(v)?;
                if let Some(extra) = g.extra.get(v) {
                    out.extend(extra.iter().cloned());
                }
                Ok(out)
            }
            (Family::Custom(o), _) => o.neighbors(v).ok_or_else(|| Error::UnknownVertex(v.clone())),
            _ => Err(Error::UnknownVertex(v.clone())),
        }
    }

    /// Neighbors of `v` that exist in the full graph but are not listed.
    pub fn exterior_degree(&self, v: &VertexId) -> usize {
        match (&self.family, v) {
            (Family::Explicit(g), VertexId::Index(i)) => g.exterior.get(i).copied().unwrap_or(0),
            (Family::GraftRay(g), VertexId::Ray { level, .. }) if *level == g.level => 0,
            (Family::GraftRay(g), _) => g.base.exterior_degree(v),
            (Family::ExtraEdges(g), _) => g.base.exterior_degree(v),
            _ => 0,
        }
    }

    /// Valence `m(v)` in the full graph.
    pub fn valence(&self, v: &VertexId) -> Result<usize> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v.clone()));
        }
        let too_big = || Error::InvalidGraph(format!("valence of {v} overflows"));
        match (&self.family, v) {
            (Family::ModelTree(t), VertexId::Path(path)) => {
                let count = t.child_count(path)? + u64::from(!path.is_empty());
                usize::try_from(count).map_err(|_| too_big())
            }
            (Family::GraftRay(g), VertexId::Ray { level, .. }) if *level == g.level => Ok(2),
            (Family::GraftRay(g), _) => Ok(g.base.valence(v)? + usize::from(*v == g.attach)),
            (Family::ExtraEdges(g), _) => {
                Ok(g.base.valence(v)? + g.extra.get(v).map_or(0, Vec::len))
            }
            _ => Ok(self.neighbors(v)?.len() + self.exterior_degree(v)),
        }
    }

    pub fn is_tree(&self) -> bool {
        match &self.family {
            Family::ModelTree(_) => true,
            Family::GraftRay(g) => g.base.is_tree(),
            Family::Explicit(g) => g.is_forest_connected_tree(),
            Family::ExtraEdges(_) => false,
            Family::Custom(o) => o.is_tree(),
        }
    }

    /// Branching law when the graph is an unmodified model tree.
    pub fn model_law(&self) -> Option<&BranchingLaw> {
        match &self.family {
            Family::ModelTree(t) if t.extra_children.is_empty() => Some(&t.law),
            _ => None,
        }
    }

    /// Law and number of rays attached at the root, when the graph is a model
    /// tree with zero or more rays grafted onto its root. Such graphs have an
    /// equitable partition into sphere cells and ray vertices.
    pub fn radial_arms(&self) -> Option<(&BranchingLaw, usize)> {
        match &self.family {
            Family::ModelTree(_) => self.model_law().map(|law| (law, 0)),
            Family::GraftRay(g) if g.attach == g.base.root() => {
                g.base.radial_arms().map(|(law, arms)| (law, arms + 1))
            }
            _ => None,
        }
    }

    fn max_ray_level(&self) -> u32 {
        match &self.family {
            Family::GraftRay(g) => g.level.max(g.base.max_ray_level()),
            Family::ExtraEdges(g) => g.base.max_ray_level(),
            _ => 0,
        }
    }

    /// Parent of `v` in a tree rooted at `root()`.
    pub fn tree_parent(&self, v: &VertexId) -> Result<Option<VertexId>> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v.clone()));
        }
        match (&self.family, v) {
            (Family::ModelTree(_), VertexId::Path(p)) => {
                Ok((!p.is_empty()).then(|| VertexId::Path(p[..p.len() - 1].to_vec())))
            }
            (Family::GraftRay(g), VertexId::Ray { level, step }) if *level == g.level => {
                Ok(Some(if *step == 1 {
                    g.attach.clone()
                } else {
                    VertexId::Ray {
                        level: *level,
                        step: step - 1,
                    }
                }))
            }
            (Family::GraftRay(g), _) => g.base.tree_parent(v),
            _ => Err(Error::NotATree),
        }
    }

    /// Whether the root-to-`v` path passes through `top`.
    pub fn in_subtree(&self, top: &VertexId, v: &VertexId) -> Result<bool> {
        let mut cur = Some(v.clone());
        while let Some(x) = cur {
            if x == *top {
                return Ok(true);
            }
            cur = self.tree_parent(&x)?;
        }
        Ok(false)
    }

    /// Convergence class of `sum 1/M(r)` where `M(r)` is the largest valence
    /// on the sphere of radius `r` about the root.
    pub fn max_valence_class(&self) -> SumClass {
        match &self.family {
            // Extra children change finitely many valences.
            Family::ModelTree(t) => t.law.sum_class(),
            Family::GraftRay(g) => g.base.max_valence_class(),
            Family::Explicit(g) if g.exterior.is_empty() => SumClass::Divergent,
            Family::Explicit(_) => SumClass::Unknown,
            Family::ExtraEdges(g) => g.base.max_valence_class(),
            Family::Custom(_) => SumClass::Unknown,
        }
    }

    /// Convergence class of `sum_{r>=1} 1/m(r)` where `m(r)` is the smallest
    /// valence among vertices of the sphere `S_r(x0)` that lie beyond `x1`.
    pub fn direction_min_class(&self, x1: &VertexId) -> Result<SumClass> {
        if !self.is_tree() {
            return Err(Error::NotATree);
        }
        let root = self.root();
        if !self.neighbors(&root)?.contains(x1) {
            return Err(Error::Precondition(format!(
                "{x1} is not a neighbor of the root {root}"
            )));
        }
        match &self.family {
            // Extra children only raise valences, and raise finitely many.
            Family::ModelTree(t) => Ok(t.law.sum_class()),
            Family::GraftRay(g) => {
                let ray_start = VertexId::Ray {
                    level: g.level,
                    step: 1,
                };
                if *x1 == ray_start {
                    // The ray itself: valence 2 forever.
                    return Ok(SumClass::Divergent);
                }
                if g.attach != root && g.base.in_subtree(x1, &g.attach)? {
                    // The ray hangs below x1, so every later sphere holds a valence-2 vertex.
                    return Ok(SumClass::Divergent);
                }
                g.base.direction_min_class(x1)
            }
            _ => Ok(SumClass::Unknown),
        }
    }

    pub fn describe(&self) -> String {
        match &self.family {
            Family::ModelTree(t) if t.extra_children.is_empty() => format!("model tree [{}]", t.law),
            Family::ModelTree(t) => format!(
                "model tree [{}] with extra children at {} vertices",
                t.law,
                t.extra_children.len()
            ),
            Family::GraftRay(g) => format!("{} + ray at {}", g.base.describe(), g.attach),
            Family::Explicit(g) => format!(
                "explicit graph ({} vertices, {} with exterior neighbors)",
                g.adjacency.len(),
                g.exterior.len()
            ),
            Family::ExtraEdges(g) => {
                format!("{} + {} extra edges", g.base.describe(), g.edges.len())
            }
            Family::Custom(o) => format!("custom graph {o:?}"),
        }
    }
}

impl ModelTree {
    fn extra(&self, path: &[u32]) -> u64 {
        self.extra_children.get(path).copied().unwrap_or(0) as u64
    }

    fn child_count(&self, path: &[u32]) -> Result<u64> {
        self.law
            .n(path.len() as u64)?
            .checked_add(self.extra(path))
            .ok_or_else(|| Error::InvalidGraph("child count overflows".into()))
    }

    fn child_count_f64(&self, path: &[u32]) -> Option<f64> {
        self.law
            .n_f64(path.len() as u64)
            .ok()
            .map(|n| n + self.extra(path) as f64)
    }
}

impl ExplicitGraph {
    fn is_forest_connected_tree(&self) -> bool {
        let vertices = self.adjacency.len();
        let edges: usize = self.adjacency.values().map(Vec::len).sum::<usize>() / 2;
        if edges + 1 != vertices {
            return false;
        }
        let mut seen = BTreeSet::from([self.root]);
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[&v] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == vertices
    }
}
