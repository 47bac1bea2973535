//! Combinatorial, reduced and bounded Laplacians on a materialized ball.
//!
//! Vertex functions are slices indexed like the ball's vertices. Values of a
//! function outside the ball are taken to be 0.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Ball;
use crate::linalg::symmetric_eigen;
use crate::options::DEFAULT_DENSE_LIMIT;

fn check_len(ball: &Ball, f: &[f64]) -> Result<()> {
    if f.len() != ball.len() {
        return Err(Error::LengthMismatch {
            expected: ball.len(),
            found: f.len(),
        });
    }
    Ok(())
}

/// `Δf(x) = m(x) f(x) - sum_{y ~ x} f(y)` at ball vertex `x`.
pub fn apply_laplacian(ball: &Ball, f: &[f64], x: usize) -> Result<f64> {
    check_len(ball, f)?;
    ball.vertex(x)?;
    if ball.outside_degree(x) > 0 {
        return Err(Error::OutOfDomain(ball.id(x).clone()));
    }
    let sum: f64 = ball.neighbors(x).iter().map(|&y| f[y]).sum();
    Ok(ball.valence(x) as f64 * f[x] - sum)
}

/// `Δ_bd f(x) = Δf(x) / m(x)`.
pub fn apply_bounded_laplacian(ball: &Ball, f: &[f64], x: usize) -> Result<f64> {
    Ok(apply_laplacian(ball, f, x)? / ball.valence(x) as f64)
}

/// Laplacian restricted to functions vanishing off a vertex subset: rows and
/// columns indexed by `indices`, full-graph valences on the diagonal.
#[derive(Clone, Debug)]
pub struct ReducedLaplacian {
    indices: Vec<usize>,
    matrix: DMatrix<f64>,
}

impl ReducedLaplacian {
    /// Ball indices of the rows, in order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Row position of ball vertex `i`.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.indices.binary_search(&i).ok()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.matrix.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Dirichlet Laplacian on the interior of the ball.
pub fn assemble_reduced(ball: &Ball) -> Result<ReducedLaplacian> {
    assemble_reduced_with_limit(ball, DEFAULT_DENSE_LIMIT)
}

pub fn assemble_reduced_with_limit(ball: &Ball, limit: usize) -> Result<ReducedLaplacian> {
    assemble_on(ball, ball.interior(), limit)
}

/// Dirichlet Laplacian on an arbitrary set of interior vertices.
pub fn assemble_on(ball: &Ball, subset: &[usize], limit: usize) -> Result<ReducedLaplacian> {
    if subset.is_empty() {
        return Err(Error::EmptyInterior);
    }
    if subset.len() > limit {
        return Err(Error::DenseLimit {
            size: subset.len(),
            limit,
        });
    }
    let mut indices = subset.to_vec();
    indices.sort_unstable();
    indices.dedup();
    let mut pos = vec![usize::MAX; ball.len()];
    for (k, &i) in indices.iter().enumerate() {
        ball.vertex(i)?;
        if !ball.is_interior(i) {
            return Err(Error::BoundaryVertex(ball.id(i).clone()));
        }
        pos[i] = k;
    }
    let n = indices.len();
    let mut matrix = DMatrix::zeros(n, n);
    for (k, &i) in indices.iter().enumerate() {
        matrix[(k, k)] = ball.valence(i) as f64;
        for &j in ball.neighbors(i) {
            if pos[j] != usize::MAX {
                matrix[(k, pos[j])] = -1.0;
            }
        }
    }
    Ok(ReducedLaplacian { indices, matrix })
}

/// Values on the in-ball edges `(i, j)`, `i < j`, oriented from `i` to `j`.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeFunction {
    pub edges: Vec<(usize, usize)>,
    pub values: Vec<f64>,
}

impl EdgeFunction {
    /// Value on the oriented edge `[x, y]`; antisymmetric in its arguments.
    pub fn value(&self, x: usize, y: usize) -> Option<f64> {
        let (key, sign) = if x < y { ((x, y), 1.0) } else { ((y, x), -1.0) };
        self.edges
            .binary_search(&key)
            .ok()
            .map(|k| sign * self.values[k])
    }
}

/// `df([x, y]) = f(y) - f(x)`.
pub fn coboundary(ball: &Ball, f: &[f64]) -> Result<EdgeFunction> {
    check_len(ball, f)?;
    let edges = ball.edges();
    let values = edges.iter().map(|&(x, y)| f[y] - f[x]).collect();
    Ok(EdgeFunction { edges, values })
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenReport {
    /// `sum_{x in B} Δf(x) g(x)` with `f = 0` off the ball.
    pub laplacian_side: f64,
    /// `sum over in-ball edges of df dg`.
    pub gradient_side: f64,
    /// `sum_x (edges from x leaving the ball) f(x) g(x)`; vanishes when f or g
    /// vanishes on the boundary.
    pub boundary_term: f64,
    pub residual: f64,
    /// `|f| |g| max m`, the natural size of either side.
    pub scale: f64,
}

pub fn green_residual(ball: &Ball, f: &[f64], g: &[f64]) -> Result<GreenReport> {
    check_len(ball, f)?;
    check_len(ball, g)?;
    let mut laplacian_side = 0.0;
    let mut boundary_term = 0.0;
    for x in 0..ball.len() {
        let sum: f64 = ball.neighbors(x).iter().map(|&y| f[y]).sum();
        laplacian_side += (ball.valence(x) as f64 * f[x] - sum) * g[x];
        boundary_term += ball.outside_degree(x) as f64 * f[x] * g[x];
    }
    let df = coboundary(ball, f)?;
    let dg = coboundary(ball, g)?;
    let gradient_side: f64 = df.values.iter().zip(&dg.values).map(|(a, b)| a * b).sum();
    let norm = |h: &[f64]| h.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(GreenReport {
        laplacian_side,
        gradient_side,
        boundary_term,
        residual: (laplacian_side - gradient_side - boundary_term).abs(),
        scale: norm(f) * norm(g) * ball.max_valence() as f64,
    })
}

/// Largest eigenvalue of the Dirichlet bounded Laplacian, symmetrized as
/// `D^{-1/2} L D^{-1/2}`; never exceeds 2.
pub fn bounded_laplacian_norm_check(ball: &Ball) -> Result<f64> {
    let reduced = assemble_reduced(ball)?;
    let sym = normalized(&reduced, ball);
    let (values, _) = symmetric_eigen(&sym)?;
    Ok(values[values.len() - 1])
}

/// `D^{-1/2} L D^{-1/2}` for a reduced Laplacian on `ball`.
pub fn normalized(reduced: &ReducedLaplacian, ball: &Ball) -> DMatrix<f64> {
    let scale: Vec<f64> = reduced
        .indices()
        .iter()
        .map(|&i| 1.0 / (ball.valence(i) as f64).sqrt())
        .collect();
    let mut m = reduced.matrix().clone();
    for ((r, c), v) in m.iter_mut().enumerate().map(|(k, v)| ((k % reduced.dim(), k / reduced.dim()), v)) {
        *v *= scale[r] * scale[c];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_model_tree, materialize_ball, BranchingLaw, GraphSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ball_of(name: &str, radius: usize) -> Ball {
        materialize_ball(&GraphSpec::preset(name).unwrap().build().unwrap(), radius).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        let b = ball_of("binary", 3);
        let ones = vec![1.0; b.len()];
        assert_eq!(apply_laplacian(&b, &ones, 0).unwrap(), 0.0);
        let mut delta = vec![0.0; b.len()];
        delta[0] = 1.0;
        assert_eq!(apply_laplacian(&b, &delta, 0).unwrap(), 3.0);
        assert_eq!(apply_bounded_laplacian(&b, &delta, 0).unwrap(), 1.0);
        let outer = b.spheres()[3][0];
        assert!(matches!(apply_laplacian(&b, &ones, outer), Err(Error::OutOfDomain(_))));

        let path = materialize_ball(
            &crate::graph::LazyGraph::explicit(&[(0, 1), (1, 2)], 0, &Default::default()).unwrap(),
            2,
        )
        .unwrap();
        let lin: Vec<f64> = (0..3).map(|i| match path.id(i) {
            crate::graph::VertexId::Index(k) => *k as f64,
            _ => unreachable!(),
        }).collect();
        let mid = path.require(&crate::graph::VertexId::Index(1)).unwrap();
        assert_eq!(apply_laplacian(&path, &lin, mid).unwrap(), 0.0);
    }

    #[test]
    fn reduced_examples() {
        let p3 = ball_of("p3", 1);
        assert_eq!(assemble_reduced(&p3).unwrap().matrix(), &DMatrix::from_element(1, 1, 2.0));
        let tree3 = build_model_tree(BranchingLaw::regular(3).unwrap());
        let b = materialize_ball(&tree3, 1).unwrap();
        assert_eq!(assemble_reduced(&b).unwrap().matrix()[(0, 0)], 3.0);
        let b = materialize_ball(&tree3, 2).unwrap();
        let l = assemble_reduced(&b).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[3., -1., -1., -1., -1., 3., 0., 0., -1., 0., 3., 0., -1., 0., 0., 3.],
        );
        assert_eq!(l.matrix(), &expected);
        assert!(matches!(
            assemble_reduced_with_limit(&b, 3),
            Err(Error::DenseLimit { size: 4, limit: 3 })
        ));
        assert!(matches!(assemble_reduced(&materialize_ball(&tree3, 0).unwrap()), Err(Error::EmptyInterior)));
    }

    #[test]
    fn coboundary_examples() {
        let b = ball_of("binary", 3);
        let dist: Vec<f64> = (0..b.len()).map(|i| b.distance(i) as f64).collect();
        let df = coboundary(&b, &dist).unwrap();
        assert!(df.values.iter().all(|v| v.abs() == 1.0));
        let (x, y) = df.edges[0];
        assert_eq!(df.value(x, y), Some(-df.value(y, x).unwrap()));
        let zero = coboundary(&b, &vec![2.5; b.len()]).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn green_delta() {
        let b = ball_of("ternary", 2);
        let mut delta = vec![0.0; b.len()];
        delta[1] = 1.0;
        let rep = green_residual(&b, &delta, &delta).unwrap();
        assert_eq!(rep.laplacian_side, 4.0);
        assert_eq!(rep.gradient_side, 4.0);
        assert_eq!(rep.residual, 0.0);
    }

    #[test]
    fn green_closed_graph_constant() {
        let cycle = crate::graph::LazyGraph::explicit(&[(0, 1), (1, 2), (2, 3), (3, 0)], 0, &Default::default()).unwrap();
        let b = materialize_ball(&cycle, 3).unwrap();
        let g = [0.3, -1.0, 2.0, 0.5];
        let rep = green_residual(&b, &[1.0; 4], &g).unwrap();
        assert_eq!(rep.laplacian_side, 0.0);
        assert_eq!(rep.gradient_side, 0.0);
    }

    #[test]
    fn bounded_norm_examples() {
        assert_relative_eq!(bounded_laplacian_norm_check(&ball_of("p3", 1)).unwrap(), 1.0, epsilon = 1e-14);
        let p3_closed = crate::graph::LazyGraph::explicit(&[(0, 1), (1, 2)], 1, &Default::default()).unwrap();
        let top = bounded_laplacian_norm_check(&materialize_ball(&p3_closed, 1).unwrap()).unwrap();
        assert_relative_eq!(top, 2.0, epsilon = 1e-12);
        for name in ["binary", "grafted", "increasing", "star", "p5"] {
            assert!(bounded_laplacian_norm_check(&ball_of(name, 4)).unwrap() <= 2.0 + 1e-10);
        }
    }

    proptest! {
        #[test]
        fn bounded_times_valence_is_laplacian(values in proptest::collection::vec(-10.0f64..10.0, 22)) {
            let b = ball_of("binary", 3);
            for &x in b.interior() {
                let full = apply_laplacian(&b, &values, x).unwrap();
                let bd = apply_bounded_laplacian(&b, &values, x).unwrap();
                prop_assert!((bd * b.valence(x) as f64 - full).abs() <= 1e-14 * full.abs().max(1.0));
            }
        }

        #[test]
        fn green_identity_random(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for name in ["binary", "grafted", "p5"] {
                let b = ball_of(name, 3);
                let mut f = vec![0.0; b.len()];
                let mut g = vec![0.0; b.len()];
                for &i in b.interior() {
                    f[i] = rng.random_range(-1.0..1.0);
                }
                for gi in g.iter_mut() {
                    *gi = rng.random_range(-1.0..1.0);
                }
                let rep = green_residual(&b, &f, &g).unwrap();
                prop_assert_eq!(rep.boundary_term, 0.0);
                prop_assert!(rep.residual <= 1e-12 * rep.scale.max(1.0));
            }
        }
    }
}
