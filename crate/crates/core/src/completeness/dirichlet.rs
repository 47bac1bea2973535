//! Dirichlet λ-problems on balls.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Ball, VertexId};
use crate::linalg::spd_solve;
use crate::options::DEFAULT_DENSE_LIMIT;

/// Solve `(L - λW) v = 0` on `unknown` (ball indices, all interior) with `v`
/// prescribed elsewhere by `fixed`. `W` is the identity, or the valence when
/// `weighted`. The matrix is positive definite whenever `λ` lies below the
/// bottom of the Dirichlet spectrum.
pub(crate) fn solve_dirichlet(
    ball: &Ball,
    unknown: &[usize],
    fixed: impl Fn(usize) -> f64,
    lambda: f64,
    weighted: bool,
    dense_limit: usize,
) -> Result<Vec<f64>> {
    let n = unknown.len();
    if n > dense_limit {
        return Err(Error::DenseLimit { size: n, limit: dense_limit });
    }
    let mut pos = vec![usize::MAX; ball.len()];
    for (k, &i) in unknown.iter().enumerate() {
        pos[i] = k;
    }
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    for (k, &i) in unknown.iter().enumerate() {
        let m = ball.valence(i) as f64;
        a[(k, k)] = m - lambda * if weighted { m } else { 1.0 };
        for &j in ball.neighbors(i) {
            if pos[j] == usize::MAX {
                b[k] += fixed(j);
            } else {
                a[(k, pos[j])] = -1.0;
            }
        }
    }
    let x = spd_solve(&a, &b)?;
    Ok((0..ball.len())
        .map(|i| if pos[i] == usize::MAX { fixed(i) } else { x[pos[i]] })
        .collect())
}

fn check_negative(lambda: f64) -> Result<()> {
    if !(lambda < 0.0) {
        return Err(Error::Precondition(format!("λ must be negative, got {lambda}")));
    }
    Ok(())
}

/// `v = (Δ_r - λ)^{-1}(λ 1) + 1`: the solution of `Δv = λv` inside the ball
/// with `v = 1` on the boundary. Takes values in `(0, 1]`.
pub fn dirichlet_lambda_boundary_one(ball: &Ball, lambda: f64) -> Result<Vec<f64>> {
    check_negative(lambda)?;
    boundary_one_with(ball, lambda, false, DEFAULT_DENSE_LIMIT)
}

pub(crate) fn boundary_one_with(ball: &Ball, lambda: f64, weighted: bool, limit: usize) -> Result<Vec<f64>> {
    if ball.interior().is_empty() {
        return Err(Error::EmptyInterior);
    }
    if ball.interior().len() == ball.len() {
        return Err(Error::EmptyBoundary);
    }
    solve_dirichlet(ball, ball.interior(), |_| 1.0, lambda, weighted, limit)
}

/// Solution of `Δv = λv` at interior vertices other than the root, with
/// `v(root) = 1` and `v = 0` on the boundary. Takes values in `(0, 1]` inside.
pub fn rooted_lambda_solution(ball: &Ball, lambda: f64) -> Result<Vec<f64>> {
    check_negative(lambda)?;
    if !ball.is_interior(0) {
        return Err(Error::BoundaryVertex(ball.center().clone()));
    }
    let unknown: Vec<usize> = ball.interior().iter().copied().filter(|&i| i != 0).collect();
    if unknown.is_empty() {
        return Ok((0..ball.len()).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect());
    }
    solve_dirichlet(ball, &unknown, |i| if i == 0 { 1.0 } else { 0.0 }, lambda, false, DEFAULT_DENSE_LIMIT)
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub lambda: f64,
    /// `x_0 ~ x_1 ~ ...`, from the center to the boundary.
    pub path: Vec<VertexId>,
    /// `v(x_i)`.
    pub values: Vec<f64>,
    /// `min_i v(x_i) - (1 - λ)^i v(x_0)`.
    pub min_margin: f64,
}

impl GrowthReport {
    pub fn length(&self) -> usize {
        self.path.len().saturating_sub(1)
    }
}

/// Solve `Δ_bd v = λv` inside with `v = 1` on the boundary, then follow the
/// largest neighbor from the center. Since the neighbors of an interior `x`
/// average to `(1 - λ) v(x)`, every step grows by at least that factor.
pub fn bounded_laplacian_growth_check(ball: &Ball, lambda: f64) -> Result<GrowthReport> {
    check_negative(lambda)?;
    if !ball.is_interior(0) {
        return Err(Error::BoundaryVertex(ball.center().clone()));
    }
    let v = boundary_one_with(ball, lambda, true, DEFAULT_DENSE_LIMIT)?;
    let mut path = vec![0];
    let mut cur = 0;
    while ball.is_interior(cur) {
        let next = *ball
            .neighbors(cur)
            .iter()
            .max_by(|&&a, &&b| v[a].total_cmp(&v[b]))
            .ok_or_else(|| Error::Precondition("isolated center".into()))?;
        path.push(next);
        cur = next;
    }
    let values: Vec<f64> = path.iter().map(|&i| v[i]).collect();
    let min_margin = values
        .iter()
        .enumerate()
        .map(|(i, &x)| x - (1.0 - lambda).powi(i as i32) * values[0])
        .fold(f64::INFINITY, f64::min);
    Ok(GrowthReport {
        lambda,
        path: path.iter().map(|&i| ball.id(i).clone()).collect(),
        values,
        min_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{materialize_ball, GraphSpec, LazyGraph};
    use approx::assert_relative_eq;

    fn preset(name: &str) -> LazyGraph {
        GraphSpec::preset(name).unwrap().build().unwrap()
    }

    #[test]
    fn p3_two_thirds() {
        let b = materialize_ball(&preset("p3"), 1).unwrap();
        let v = dirichlet_lambda_boundary_one(&b, -1.0).unwrap();
        assert_relative_eq!(v[0], 2.0 / 3.0, epsilon = 1e-15);
        assert!(v[1..].iter().all(|&x| x == 1.0));
    }

    #[test]
    fn p5_rooted_and_growth() {
        let b = materialize_ball(&preset("p5"), 2).unwrap();
        let v = rooted_lambda_solution(&b, -1.0).unwrap();
        assert_eq!(v[0], 1.0);
        assert_relative_eq!(v[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(v[2], 1.0 / 3.0, epsilon = 1e-15);
        let g = bounded_laplacian_growth_check(&b, -1.0).unwrap();
        assert_eq!(g.length(), 2);
        assert_relative_eq!(g.values[0], 1.0 / 7.0, epsilon = 1e-15);
        assert_relative_eq!(g.values[1], 2.0 / 7.0, epsilon = 1e-15);
        assert!(g.min_margin >= -1e-10);
        assert!(bounded_laplacian_growth_check(&b, 0.0).is_err());
    }

    #[test]
    fn rooted_radius_one() {
        let b = materialize_ball(&preset("binary"), 1).unwrap();
        let v = rooted_lambda_solution(&b, -1.0).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn ranges_and_monotonicity() {
        for name in ["binary", "grafted", "ray", "increasing"] {
            let g = preset(name);
            let mut prev_one: Option<(Ball, Vec<f64>)> = None;
            let mut prev_rooted: Option<(Ball, Vec<f64>)> = None;
            for r in 1..=5 {
                let b = materialize_ball(&g, r).unwrap();
                let one = dirichlet_lambda_boundary_one(&b, -1.0).unwrap();
                assert!(one.iter().all(|&x| x > 0.0 && x <= 1.0));
                let rooted = rooted_lambda_solution(&b, -1.0).unwrap();
                for &i in b.interior() {
                    assert!(rooted[i] > 0.0 && rooted[i] <= 1.0);
                }
                if let Some((pb, pv)) = &prev_one {
                    for i in 0..pb.len() {
                        let j = b.require(pb.id(i)).unwrap();
                        assert!(pv[i] >= one[j] - 1e-12);
                    }
                }
                if let Some((pb, pv)) = &prev_rooted {
                    for i in 0..pb.len() {
                        let j = b.require(pb.id(i)).unwrap();
                        assert!(pv[i] <= rooted[j] + 1e-12);
                    }
                }
                prev_one = Some((b.clone(), one));
                prev_rooted = Some((b, rooted));
            }
        }
    }
}
