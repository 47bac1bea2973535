//! Finite balls materialized from a lazy graph.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::law::BranchingLaw;
use crate::graph::lazy::LazyGraph;
use crate::graph::vertex::VertexId;

/// Default cap on the number of vertices of a materialized ball.
pub const DEFAULT_CAPACITY: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexClass {
    Interior,
    /// Adjacent, in the full graph, to a vertex outside the ball.
    Boundary,
}

#[derive(Clone, Debug, Serialize)]
pub struct BallVertex {
    pub id: VertexId,
    /// BFS distance to the center.
    pub distance: usize,
    /// Valence in the full graph.
    pub valence: usize,
    pub class: VertexClass,
}

/// Ball `B_R(center)` with vertices in BFS order (neighbor-oracle order within
/// each layer). Index 0 is the center.
#[derive(Clone, Debug)]
pub struct Ball {
    radius: usize,
    vertices: Vec<BallVertex>,
    index: HashMap<VertexId, usize>,
    adjacency: Vec<Vec<usize>>,
    spheres: Vec<Vec<usize>>,
    interior: Vec<usize>,
    interior_pos: Vec<Option<usize>>,
    is_tree: bool,
    centered_at_root: bool,
    model_law: Option<BranchingLaw>,
}

/// Ball of the given radius about the root.
pub fn materialize_ball(g: &LazyGraph, radius: usize) -> Result<Ball> {
    materialize_ball_at(g, &g.root(), radius, DEFAULT_CAPACITY)
}

/// Ball of the given radius about `center`, failing once it would hold more
/// than `cap` vertices.
pub fn materialize_ball_at(
    g: &LazyGraph,
    center: &VertexId,
    radius: usize,
    cap: usize,
) -> Result<Ball> {
    if !g.contains(center) {
        return Err(Error::UnknownVertex(center.clone()));
    }
    let capacity = || Error::Capacity { radius, cap };
    if cap == 0 {
        return Err(capacity());
    }
    let is_tree = g.is_tree();
    let mut vertices = vec![BallVertex {
        id: center.clone(),
        distance: 0,
        valence: g.valence(center)?,
        class: VertexClass::Interior,
    }];
    let mut index = HashMap::from([(center.clone(), 0usize)]);
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new()];
    let mut spheres = vec![vec![0usize]];

    for d in 0..radius {
        let mut next = Vec::new();
        for &i in &spheres[d] {
            let id = vertices[i].id.clone();
            let mut adj = Vec::new();
            for w in g.neighbors(&id)? {
                let j = match index.entry(w) {
                    Entry::Occupied(e) => *e.get(),
                    Entry::Vacant(e) => {
                        if vertices.len() >= cap {
                            return Err(capacity());
                        }
                        let w = e.key().clone();
                        let j = vertices.len();
                        e.insert(j);
                        vertices.push(BallVertex {
                            valence: g.valence(&w)?,
                            id: w,
                            distance: d + 1,
                            class: VertexClass::Interior,
                        });
                        adjacency.push(Vec::new());
                        next.push(j);
                        j
                    }
                };
                adj.push(j);
            }
            adjacency[i] = adj;
        }
        spheres.push(next);
    }

    // Outer sphere: only in-ball neighbors are recorded.
    let last = spheres[radius].clone();
    if is_tree && radius > 0 {
        let mut parent = vec![usize::MAX; vertices.len()];
        for &i in spheres[radius - 1].iter() {
            for &j in &adjacency[i] {
                if vertices[j].distance == radius {
                    parent[j] = i;
                }
            }
        }
        for &i in &last {
            adjacency[i] = vec![parent[i]];
        }
    } else {
        for &i in &last {
            let id = vertices[i].id.clone();
            adjacency[i] = g
                .neighbors(&id)?
                .iter()
                .filter_map(|w| index.get(w).copied())
                .collect();
        }
    }

    let mut interior = Vec::new();
    let mut interior_pos = vec![None; vertices.len()];
    for (i, v) in vertices.iter_mut().enumerate() {
        if v.valence > adjacency[i].len() {
            v.class = VertexClass::Boundary;
        } else {
            interior_pos[i] = Some(interior.len());
            interior.push(i);
        }
    }

    let centered_at_root = *center == g.root();
    let model_law = g.model_law().filter(|_| centered_at_root).cloned();
    Ok(Ball {
        radius,
        vertices,
        index,
        adjacency,
        spheres,
        interior,
        interior_pos,
        is_tree,
        centered_at_root,
        model_law,
    })
}

impl Ball {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn center(&self) -> &VertexId {
        &self.vertices[0].id
    }

    pub fn centered_at_root(&self) -> bool {
        self.centered_at_root
    }

    pub fn vertices(&self) -> &[BallVertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Result<&BallVertex> {
        self.vertices.get(i).ok_or(Error::IndexOutOfRange(i))
    }

    pub fn id(&self, i: usize) -> &VertexId {
        &self.vertices[i].id
    }

    pub fn distance(&self, i: usize) -> usize {
        self.vertices[i].distance
    }

    pub fn valence(&self, i: usize) -> usize {
        self.vertices[i].valence
    }

    pub fn class(&self, i: usize) -> VertexClass {
        self.vertices[i].class
    }

    pub fn is_interior(&self, i: usize) -> bool {
        self.interior_pos[i].is_some()
    }

    pub fn index_of(&self, id: &VertexId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &VertexId) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownVertex(id.clone()))
    }

    /// In-ball neighbors of vertex `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Full-graph neighbors of `i` that lie outside the ball.
    pub fn outside_degree(&self, i: usize) -> usize {
        self.vertices[i].valence - self.adjacency[i].len()
    }

    /// Vertex indices at each distance `0..=radius`.
    pub fn spheres(&self) -> &[Vec<usize>] {
        &self.spheres
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Position of vertex `i` among the interior vertices.
    pub fn interior_position(&self, i: usize) -> Option<usize> {
        self.interior_pos[i]
    }

    pub fn boundary(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_interior(i)).collect()
    }

    /// Unordered in-ball edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, adj) in self.adjacency.iter().enumerate() {
            out.extend(adj.iter().filter(|&&j| i < j).map(|&j| (i, j)));
        }
        out
    }

    pub fn is_tree(&self) -> bool {
        self.is_tree
    }

    /// Branching law when the ball is a root-centered ball of a model tree.
    pub fn model_law(&self) -> Option<&BranchingLaw> {
        self.model_law.as_ref()
    }

    pub fn max_valence(&self) -> usize {
        self.vertices.iter().map(|v| v.valence).max().unwrap_or(0)
    }

    /// In a tree ball, the neighbor of `i` one step closer to the center.
    pub fn parent(&self, i: usize) -> Option<usize> {
        let d = self.distance(i);
        if d == 0 {
            return None;
        }
        self.adjacency[i]
            .iter()
            .copied()
            .find(|&j| self.distance(j) + 1 == d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::lazy::{build_model_tree, graft_ray};
    use std::collections::BTreeMap;

    fn binary() -> LazyGraph {
        build_model_tree(BranchingLaw::constant(3, 2).unwrap())
    }

    #[test]
    fn radius_zero() {
        let b = materialize_ball(&binary(), 0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.class(0), VertexClass::Boundary);
        let lone = LazyGraph::explicit(&[], 0, &BTreeMap::new()).unwrap();
        let b = materialize_ball(&lone, 0).unwrap();
        assert_eq!(b.class(0), VertexClass::Interior);
    }

    #[test]
    fn binary_radius_two() {
        let b = materialize_ball(&binary(), 2).unwrap();
        assert_eq!(b.len(), 10);
        assert_eq!(b.boundary().len(), 6);
        assert_eq!(b.interior().len(), 4);
        let sizes: Vec<usize> = b.spheres().iter().map(Vec::len).collect();
        assert_eq!(sizes, [1, 3, 6]);
        assert_eq!(b.edges().len(), 9);
    }

    #[test]
    fn capacity_is_an_error() {
        let g = build_model_tree(BranchingLaw::exponential(2, 2, 1).unwrap());
        assert!(matches!(
            materialize_ball_at(&g, &g.root(), 6, 1000),
            Err(Error::Capacity { radius: 6, cap: 1000 })
        ));
    }

    #[test]
    fn grafted_ball_holds_ray_piece() {
        let law = BranchingLaw::exponential(2, 2, 1).unwrap();
        let tree = build_model_tree(law);
        let plain = materialize_ball(&tree, 2).unwrap();
        let g = graft_ray(tree, &VertexId::root_path()).unwrap();
        let b = materialize_ball(&g, 2).unwrap();
        assert_eq!(b.len(), plain.len() + 2);
        let b3 = materialize_ball(&g, 3).unwrap();
        let rays = b3
            .vertices()
            .iter()
            .filter(|v| matches!(v.id, VertexId::Ray { .. }))
            .count();
        assert_eq!(rays, 3);
        assert!(b.model_law().is_none());
    }

    #[test]
    fn explicit_exterior_makes_boundary() {
        let ext = BTreeMap::from([(0u64, 1usize), (2, 1)]);
        let p3 = LazyGraph::explicit(&[(0, 1), (1, 2)], 1, &ext).unwrap();
        let b = materialize_ball(&p3, 5).unwrap();
        assert_eq!(b.interior().len(), 1);
        assert_eq!(b.id(b.interior()[0]), &VertexId::Index(1));
    }
}
