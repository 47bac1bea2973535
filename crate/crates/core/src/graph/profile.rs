//! Valence statistics of a ball: per-sphere extremes and directional counts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::ball::Ball;
use crate::graph::vertex::VertexId;

#[derive(Clone, Debug, Serialize)]
pub struct ValenceProfile {
    /// `underline_m(r)`, smallest valence on sphere `r`.
    pub min: Vec<usize>,
    /// `M(r)`, largest valence on sphere `r`.
    pub max: Vec<usize>,
    /// Neighbors at the same distance, per ball vertex.
    pub m_same: Vec<usize>,
    /// Neighbors one step farther out, per ball vertex. Neighbors outside the
    /// ball count here: they sit at distance `radius + 1`, or are exterior
    /// neighbors of an explicit graph whose distance is unknown.
    pub m_out: Vec<usize>,
    /// Neighbors one step closer in, per ball vertex.
    pub m_in: Vec<usize>,
    pub valence: Vec<usize>,
}

pub fn valence_profile(ball: &Ball) -> ValenceProfile {
    let n = ball.len();
    let mut m_same = vec![0; n];
    let mut m_out = vec![0; n];
    let mut m_in = vec![0; n];
    for i in 0..n {
        let d = ball.distance(i);
        for &j in ball.neighbors(i) {
            match ball.distance(j) {
                dj if dj == d => m_same[i] += 1,
                dj if dj > d => m_out[i] += 1,
                _ => m_in[i] += 1,
            }
        }
        m_out[i] += ball.outside_degree(i);
    }
    let (min, max) = ball
        .spheres()
        .iter()
        .map(|s| {
            let vals = s.iter().map(|&i| ball.valence(i));
            (vals.clone().min().unwrap_or(0), vals.max().unwrap_or(0))
        })
        .unzip();
    ValenceProfile {
        min,
        max,
        m_same,
        m_out,
        m_in,
        valence: (0..n).map(|i| ball.valence(i)).collect(),
    }
}

impl ValenceProfile {
    /// Whether `m = m_same + m_out + m_in` at every vertex.
    pub fn identity_holds(&self) -> bool {
        (0..self.valence.len())
            .all(|i| self.valence[i] == self.m_same[i] + self.m_out[i] + self.m_in[i])
    }
}

/// Smallest valence on each sphere `r >= 1` restricted to the vertices whose
/// path to the center passes through the neighbor `x1`. Entry 0 is the
/// center's valence.
pub fn directional_min(ball: &Ball, x1: &VertexId) -> Result<Vec<usize>> {
    if !ball.is_tree() {
        return Err(Error::NotATree);
    }
    let start = ball.require(x1)?;
    if ball.distance(start) != 1 {
        return Err(Error::Precondition(format!("{x1} is not a neighbor of the center")));
    }
    let mut below = vec![false; ball.len()];
    below[start] = true;
    let mut out = vec![ball.valence(0)];
    for sphere in &ball.spheres()[1..] {
        let mut m = usize::MAX;
        for &i in sphere {
            if ball.distance(i) > 1 {
                below[i] = ball.parent(i).is_some_and(|p| below[p]);
            }
            if below[i] {
                m = m.min(ball.valence(i));
            }
        }
        out.push(m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ball::materialize_ball;
    use crate::graph::law::BranchingLaw;
    use crate::graph::lazy::{build_model_tree, graft_ray};

    #[test]
    fn model_tree_profile() {
        let law = BranchingLaw::affine(3, 1, 2).unwrap();
        let ball = materialize_ball(&build_model_tree(law.clone()), 4).unwrap();
        let p = valence_profile(&ball);
        assert!(p.identity_holds());
        for r in 1..=4 {
            assert_eq!(p.min[r] as u64, law.valence(r as u64).unwrap());
            assert_eq!(p.max[r], p.min[r]);
        }
        for i in 1..ball.len() {
            assert_eq!(p.m_same[i], 0);
            assert_eq!(p.m_in[i], 1);
        }
    }

    #[test]
    fn grafted_min_is_two() {
        let law = BranchingLaw::exponential(2, 2, 1).unwrap();
        let g = graft_ray(build_model_tree(law), &VertexId::root_path()).unwrap();
        let ball = materialize_ball(&g, 4).unwrap();
        let p = valence_profile(&ball);
        assert!(p.min[1..].iter().all(|&m| m == 2));
        let along_tree = directional_min(&ball, &VertexId::path(&[0])).unwrap();
        assert_eq!(&along_tree[1..], &[3, 5, 9, 17]);
        let along_ray = directional_min(&ball, &VertexId::Ray { level: 1, step: 1 }).unwrap();
        assert!(along_ray[1..].iter().all(|&m| m == 2));
    }
}
