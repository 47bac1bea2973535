//! Exact radial reduction of root-centered balls.
//!
//! On a model tree, possibly with rays glued to its root, the spheres of each
//! arm form an equitable partition: every vertex of cell `i` has the same
//! number `b(i,j)` of neighbors in cell `j`. The Laplacian maps functions
//! constant on cells to functions constant on cells, and in the orthonormal
//! basis `1_cell / sqrt(|cell|)` it becomes the symmetric matrix with diagonal
//! `m(cell)` and off-diagonal entries `-sqrt(b(i,j) b(j,i))`. Every quantity
//! below is either computed from `δ_root`, which lies in the radial subspace,
//! or is unique and therefore radial, so the reduction is exact.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{BranchingLaw, LazyGraph, VertexId};
use crate::linalg::{lu_solve, symmetric_eigen};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arm {
    /// The root, or a sphere of the model tree.
    Tree,
    /// The `k`-th ray glued to the root (0-based, in graft order).
    Ray(usize),
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub arm: Arm,
    pub distance: usize,
    /// Natural log of the number of vertices in the cell.
    pub ln_size: f64,
    pub valence: f64,
}

#[derive(Clone, Debug)]
pub struct RadialQuotient {
    radius: usize,
    arms: usize,
    cells: Vec<Cell>,
    /// `(i, j, b(i,j), b(j,i))`, each unordered pair once.
    links: Vec<(usize, usize, f64, f64)>,
}

impl RadialQuotient {
    /// Quotient of `B_radius(root)` when the graph is a model tree with zero or
    /// more rays glued to its root.
    pub fn of_graph(g: &LazyGraph, radius: usize) -> Option<Result<Self>> {
        g.radial_arms().map(|(law, arms)| Self::new(law, arms, radius))
    }

    pub fn new(law: &BranchingLaw, arms: usize, radius: usize) -> Result<Self> {
        let mut cells = vec![Cell {
            arm: Arm::Tree,
            distance: 0,
            ln_size: 0.0,
            valence: law.n_f64(0)? + arms as f64,
        }];
        let mut links = Vec::new();
        let mut ln_size = 0.0;
        for r in 1..=radius {
            let n_prev = law.n_f64(r as u64 - 1)?;
            ln_size += n_prev.ln();
            cells.push(Cell {
                arm: Arm::Tree,
                distance: r,
                ln_size,
                valence: law.n_f64(r as u64)? + 1.0,
            });
            let prev = if r == 1 { 0 } else { cells.len() - 2 };
            links.push((prev, cells.len() - 1, n_prev, 1.0));
        }
        for k in 0..arms {
            for s in 1..=radius {
                cells.push(Cell {
                    arm: Arm::Ray(k),
                    distance: s,
                    ln_size: 0.0,
                    valence: 2.0,
                });
                let prev = if s == 1 { 0 } else { cells.len() - 2 };
                links.push((prev, cells.len() - 1, 1.0, 1.0));
            }
        }
        Ok(Self {
            radius,
            arms,
            cells,
            links,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Cells not on the outer sphere. The root cell is interior whenever the
    /// radius is positive.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&c| self.cells[c].distance < self.radius)
            .collect()
    }

    /// Cell containing a vertex of the graph, if it lies in the ball.
    pub fn cell_of(&self, v: &VertexId) -> Option<usize> {
        let (arm, d) = match v {
            VertexId::Path(p) => (Arm::Tree, p.len()),
            VertexId::Ray { level, step } => (Arm::Ray(*level as usize - 1), *step as usize),
            VertexId::Index(_) => return None,
        };
        if d > self.radius {
            return None;
        }
        match arm {
            Arm::Tree => Some(d),
            Arm::Ray(k) if k < self.arms => Some(self.radius + 1 + k * self.radius + d - 1),
            Arm::Ray(_) => None,
        }
    }

    /// Symmetric quotient of the Dirichlet Laplacian on the given cells.
    pub fn symmetric_on(&self, subset: &[usize]) -> DMatrix<f64> {
        let pos = self.positions(subset);
        let n = subset.len();
        let mut m = DMatrix::zeros(n, n);
        for (k, &c) in subset.iter().enumerate() {
            m[(k, k)] = self.cells[c].valence;
        }
        for &(i, j, bij, bji) in &self.links {
            if let (Some(a), Some(b)) = (pos[i], pos[j]) {
                let w = -(bij * bji).sqrt();
                m[(a, b)] = w;
                m[(b, a)] = w;
            }
        }
        m
    }

    fn positions(&self, subset: &[usize]) -> Vec<Option<usize>> {
        let mut pos = vec![None; self.cells.len()];
        for (k, &c) in subset.iter().enumerate() {
            pos[c] = Some(k);
        }
        pos
    }

    /// Solve `(L - λ W) v = 0` on `unknown` cells, with `v` prescribed on all
    /// other cells by `fixed`. `W` is the identity, or the valence when
    /// `weighted`. Returns values on every cell.
    fn solve_radial(
        &self,
        unknown: &[usize],
        fixed: impl Fn(usize) -> f64,
        lambda: f64,
        weighted: bool,
    ) -> Result<Vec<f64>> {
        let pos = self.positions(unknown);
        let n = unknown.len();
        let mut a = DMatrix::zeros(n, n);
        let mut rhs = DVector::zeros(n);
        for (k, &c) in unknown.iter().enumerate() {
            let m = self.cells[c].valence;
            a[(k, k)] = m - lambda * if weighted { m } else { 1.0 };
        }
        let mut couple = |from: usize, to: usize, b: f64| {
            if let Some(k) = pos[from] {
                match pos[to] {
                    Some(l) => a[(k, l)] -= b,
                    None => rhs[k] += b * fixed(to),
                }
            }
        };
        for &(i, j, bij, bji) in &self.links {
            couple(i, j, bij);
            couple(j, i, bji);
        }
        let x = lu_solve(&a, &rhs)?;
        Ok((0..self.cells.len())
            .map(|c| pos[c].map_or_else(|| fixed(c), |k| x[k]))
            .collect())
    }

    /// Solution of `Δv = λv` inside with `v = 1` on the outer sphere, per cell.
    pub fn boundary_one(&self, lambda: f64) -> Result<Vec<f64>> {
        let interior = self.interior();
        if interior.is_empty() {
            return Err(Error::EmptyInterior);
        }
        self.solve_radial(&interior, |_| 1.0, lambda, false)
    }

    /// Solution of `Δ_bd v = λv` inside with `v = 1` on the outer sphere.
    pub fn boundary_one_bounded(&self, lambda: f64) -> Result<Vec<f64>> {
        let interior = self.interior();
        if interior.is_empty() {
            return Err(Error::EmptyInterior);
        }
        self.solve_radial(&interior, |_| 1.0, lambda, true)
    }

    /// Solution of `Δv = λv` off the root with `v(root) = 1` and `v = 0` on
    /// the outer sphere.
    pub fn rooted(&self, lambda: f64) -> Result<Vec<f64>> {
        let unknown: Vec<usize> = self.interior().into_iter().filter(|&c| c != 0).collect();
        if unknown.is_empty() {
            return Ok((0..self.cells.len()).map(|c| if c == 0 { 1.0 } else { 0.0 }).collect());
        }
        self.solve_radial(&unknown, |c| if c == 0 { 1.0 } else { 0.0 }, lambda, false)
    }

    /// Smallest Dirichlet eigenvalue of the cells beyond `inner` (all interior
    /// cells when `inner` is `None`) and the matching positive radial
    /// eigenfunction, per cell, scaled to maximum 1.
    pub fn lambda0_beyond(&self, inner: Option<usize>) -> Result<(f64, Vec<f64>)> {
        let subset: Vec<usize> = self
            .interior()
            .into_iter()
            .filter(|&c| inner.is_none_or(|r| self.cells[c].distance > r))
            .collect();
        if subset.is_empty() {
            return Err(Error::EmptyInterior);
        }
        let (values, vectors) = symmetric_eigen(&self.symmetric_on(&subset))?;
        let q = vectors.column(0);
        let mut f = vec![0.0; self.cells.len()];
        let mut ln_max = f64::NEG_INFINITY;
        let logs: Vec<f64> = subset
            .iter()
            .zip(q.iter())
            .map(|(&c, &x)| x.abs().ln() - 0.5 * self.cells[c].ln_size)
            .collect();
        for &l in &logs {
            ln_max = ln_max.max(l);
        }
        for (&c, &l) in subset.iter().zip(&logs) {
            f[c] = (l - ln_max).exp();
        }
        Ok((values[0], f))
    }

    pub fn lambda0(&self) -> Result<(f64, Vec<f64>)> {
        self.lambda0_beyond(None)
    }

    /// `p_t(root, x)` for a vertex `x` in each cell, zero on the outer sphere.
    pub fn root_kernel(&self, t: f64) -> Result<RootKernel> {
        let interior = self.interior();
        if interior.is_empty() {
            return Err(Error::EmptyInterior);
        }
        let (values, vectors) = symmetric_eigen(&self.symmetric_on(&interior))?;
        Ok(RootKernel {
            cells: interior,
            ln_size: self.cells.iter().map(|c| c.ln_size).collect(),
            values,
            vectors,
            t,
        })
    }
}

/// Spectral form of `exp(-tQ)` restricted to the root row.
#[derive(Clone, Debug)]
pub struct RootKernel {
    cells: Vec<usize>,
    ln_size: Vec<f64>,
    values: DVector<f64>,
    vectors: DMatrix<f64>,
    t: f64,
}

impl RootKernel {
    /// `(exp(-tQ))[root, k]` for each interior position `k`.
    fn row(&self, t: f64) -> Vec<f64> {
        let root = 0; // the root cell is first in the interior ordering
        (0..self.cells.len())
            .map(|k| {
                (0..self.values.len())
                    .map(|i| {
                        (-t * self.values[i]).exp() * self.vectors[(root, i)] * self.vectors[(k, i)]
                    })
                    .sum()
            })
            .collect()
    }

    /// `p_t(root, x)` for `x` in each cell; 0 for outer-sphere cells.
    pub fn values(&self) -> Vec<f64> {
        self.values_at(self.t)
    }

    pub fn values_at(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.ln_size.len()];
        for (k, w) in self.row(t).into_iter().enumerate() {
            let c = self.cells[k];
            out[c] = w * (-0.5 * self.ln_size[c]).exp();
        }
        out
    }

    /// `sum_y p_t(root, y)`.
    pub fn mass_at(&self, t: f64) -> f64 {
        self.row(t)
            .into_iter()
            .enumerate()
            .map(|(k, w)| w * (0.5 * self.ln_size[self.cells[k]]).exp())
            .sum()
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        self.values[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_model_tree, graft_ray};
    use approx::assert_relative_eq;

    #[test]
    fn star_lambda0() {
        let q = RadialQuotient::new(&BranchingLaw::regular(3).unwrap(), 0, 2).unwrap();
        let (l0, f) = q.lambda0().unwrap();
        assert_relative_eq!(l0, 3.0 - 3f64.sqrt(), epsilon = 1e-12);
        assert!(f[0] > 0.0 && f[1] > 0.0 && f[2] == 0.0);
    }

    #[test]
    fn cells_of_grafted_vertices() {
        let law = BranchingLaw::exponential(2, 2, 1).unwrap();
        let g = graft_ray(build_model_tree(law), &VertexId::root_path()).unwrap();
        let q = RadialQuotient::of_graph(&g, 4).unwrap().unwrap();
        assert_eq!(q.cells().len(), 1 + 4 + 4);
        assert_eq!(q.cell_of(&VertexId::path(&[1, 0, 3])), Some(3));
        assert_eq!(q.cell_of(&VertexId::Ray { level: 1, step: 2 }), Some(6));
        assert_eq!(q.cells()[6].distance, 2);
        assert_eq!(q.cell_of(&VertexId::Ray { level: 1, step: 5 }), None);
        assert_eq!(q.cells()[0].valence, 3.0);
    }

    #[test]
    fn p3_like_kernel_on_ray_root() {
        // Radius-1 quotient of the ray: one interior cell of valence 1.
        let q = RadialQuotient::new(&BranchingLaw::constant(1, 1).unwrap(), 0, 1).unwrap();
        let k = q.root_kernel(1.0).unwrap();
        assert_relative_eq!(k.values()[0], (-1.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(k.mass_at(1.0), (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn rooted_radius_one_is_delta() {
        let q = RadialQuotient::new(&BranchingLaw::regular(3).unwrap(), 0, 1).unwrap();
        assert_eq!(q.rooted(-1.0).unwrap(), vec![1.0, 0.0]);
    }
}
