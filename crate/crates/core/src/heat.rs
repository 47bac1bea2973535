//! Dirichlet heat kernels on balls and their exhaustion limit.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{materialize_ball_at, Ball, LazyGraph, VertexId};
use crate::linalg::{expm_series, symmetric_eigen, SeriesExp};
use crate::operators::{assemble_reduced_with_limit, ReducedLaplacian};
use crate::options::{ComputeOptions, DEFAULT_DENSE_LIMIT};
use crate::output::{csv, num, opt_num};
use crate::quotient::RadialQuotient;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// reduced Laplacian.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

pub fn spectral_decompose(l: &ReducedLaplacian) -> Result<SpectralDecomposition> {
    let m = l.matrix();
    if m != &m.transpose() {
        return Err(Error::Precondition("reduced Laplacian is not symmetric".into()));
    }
    let (eigenvalues, eigenvectors) = symmetric_eigen(m)?;
    let n = eigenvalues.len();
    let top = eigenvalues.amax().max(1.0);
    let residual = (m * &eigenvectors - &eigenvectors * DMatrix::from_diagonal(&eigenvalues)).amax();
    if residual > 1e-10 * top {
        return Err(Error::Eigensolver(format!("eigenpair residual {residual:e}")));
    }
    let gram = (eigenvectors.transpose() * &eigenvectors - DMatrix::identity(n, n)).amax();
    if gram > 1e-10 {
        return Err(Error::Eigensolver(format!("eigenvectors not orthonormal ({gram:e})")));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `sum_i w(λ_i) φ_i φ_i^T`.
    fn functional(&self, w: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&self.eigenvalues.map(w));
        &self.eigenvectors * d * self.eigenvectors.transpose()
    }

    /// Interior block of `p_t`.
    pub fn kernel_matrix(&self, t: f64) -> DMatrix<f64> {
        self.functional(|l| (-l * t).exp())
    }

    /// `∂p_t/∂t = -sum_i λ_i e^{-λ_i t} φ_i φ_i^T`.
    pub fn time_derivative(&self, t: f64) -> DMatrix<f64> {
        self.functional(|l| -l * (-l * t).exp())
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Dirichlet heat kernel `p_t^r` of a ball.
#[derive(Clone, Debug)]
pub struct HeatKernel<'a> {
    ball: &'a Ball,
    reduced: ReducedLaplacian,
    spectral: SpectralDecomposition,
}

impl<'a> HeatKernel<'a> {
    pub fn new(ball: &'a Ball) -> Result<Self> {
        Self::with_limit(ball, DEFAULT_DENSE_LIMIT)
    }

    pub fn with_limit(ball: &'a Ball, dense_limit: usize) -> Result<Self> {
        let reduced = assemble_reduced_with_limit(ball, dense_limit)?;
        let spectral = spectral_decompose(&reduced)?;
        Ok(Self {
            ball,
            reduced,
            spectral,
        })
    }

    pub fn ball(&self) -> &Ball {
        self.ball
    }

    pub fn reduced(&self) -> &ReducedLaplacian {
        &self.reduced
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    /// `p_t(x, y)` for ball indices; 0 when either is a boundary vertex.
    pub fn value(&self, x: usize, y: usize, t: f64) -> Result<f64> {
        check_time(t)?;
        self.ball.vertex(x)?;
        self.ball.vertex(y)?;
        let (Some(a), Some(b)) = (self.reduced.position(x), self.reduced.position(y)) else {
            return Ok(0.0);
        };
        let s = &self.spectral;
        Ok((0..s.dim())
            .map(|i| (-s.eigenvalues[i] * t).exp() * s.eigenvectors[(a, i)] * s.eigenvectors[(b, i)])
            .sum())
    }

    pub fn value_by_id(&self, x: &VertexId, y: &VertexId, t: f64) -> Result<f64> {
        self.value(self.ball.require(x)?, self.ball.require(y)?, t)
    }

    /// `p_t(x, ·)` over all ball vertices.
    pub fn row(&self, x: usize, t: f64) -> Result<Vec<f64>> {
        check_time(t)?;
        self.ball.vertex(x)?;
        let mut out = vec![0.0; self.ball.len()];
        let Some(a) = self.reduced.position(x) else {
            return Ok(out);
        };
        let s = &self.spectral;
        let weights: Vec<f64> = (0..s.dim())
            .map(|i| (-s.eigenvalues[i] * t).exp() * s.eigenvectors[(a, i)])
            .collect();
        for (k, &y) in self.reduced.indices().iter().enumerate() {
            out[y] = (0..s.dim()).map(|i| weights[i] * s.eigenvectors[(k, i)]).sum();
        }
        Ok(out)
    }

    /// Interior block of `p_t`, rows ordered as `reduced().indices()`.
    pub fn matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        check_time(t)?;
        Ok(self.spectral.kernel_matrix(t))
    }

    /// `sum_y p_t(x, y)`.
    pub fn mass(&self, x: usize, t: f64) -> Result<f64> {
        self.ball.vertex(x)?;
        if !self.ball.is_interior(x) {
            return Err(Error::BoundaryVertex(self.ball.id(x).clone()));
        }
        Ok(self.row(x, t)?.iter().sum())
    }
}

/// `exp(-tL)` through the power series, independent of the eigensolver.
pub fn semigroup_series(l: &ReducedLaplacian, t: f64) -> Result<SeriesExp> {
    check_time(t)?;
    Ok(expm_series(&(-t * l.matrix())))
}

/// Largest violation of each kernel property over a time grid.
#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub symmetry: f64,
    pub boundary: f64,
    /// `|p_{s+t} - p_s p_t|` over grid pairs.
    pub semigroup: f64,
    /// Smallest interior kernel value at positive grid times.
    pub positivity_min: f64,
    /// `|Δ p_t + ∂p_t/∂t|` with the analytic time derivative.
    pub heat_equation: f64,
    /// Distance of kernel values from `[0, 1]`; the maximum principle bounds
    /// `p_t` by its initial maximum.
    pub range: f64,
    /// Analytic versus central-difference time derivative.
    pub finite_difference: f64,
    /// Eigen route versus power series.
    pub series_agreement: f64,
    /// `|p_0 - I|` on the interior.
    pub initial: f64,
}

impl KernelReport {
    pub fn max_violation(&self) -> f64 {
        [
            self.symmetry,
            self.boundary,
            self.semigroup,
            self.heat_equation,
            self.range,
            self.initial,
            (-self.positivity_min).max(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn verify_kernel_properties(k: &HeatKernel, t_grid: &[f64]) -> Result<KernelReport> {
    for &t in t_grid {
        check_time(t)?;
    }
    let ball = k.ball();
    let l = k.reduced().matrix();
    let mut rep = KernelReport {
        symmetry: 0.0,
        boundary: 0.0,
        semigroup: 0.0,
        positivity_min: f64::INFINITY,
        heat_equation: 0.0,
        range: 0.0,
        finite_difference: 0.0,
        series_agreement: 0.0,
        initial: (k.matrix(0.0)? - DMatrix::identity(l.nrows(), l.nrows())).amax(),
    };
    let boundary = ball.boundary();
    let probes: Vec<usize> = ball.interior().iter().copied().take(4).collect();
    for &t in t_grid {
        let p = k.matrix(t)?;
        rep.symmetry = rep.symmetry.max((&p - p.transpose()).amax());
        rep.range = rep
            .range
            .max(p.iter().map(|&v| (-v).max(v - 1.0).max(0.0)).fold(0.0, f64::max));
        if t > 0.0 {
            rep.positivity_min = rep.positivity_min.min(p.min());
        }
        let dp = k.spectral().time_derivative(t);
        rep.heat_equation = rep.heat_equation.max((l * &p + &dp).amax());
        let h = 1e-5_f64.min(t / 2.0).max(1e-7);
        if t >= h {
            let fd = (k.matrix(t + h)? - k.matrix(t - h)?) / (2.0 * h);
            rep.finite_difference = rep.finite_difference.max((fd - dp).amax());
        }
        let series = semigroup_series(k.reduced(), t)?.value;
        rep.series_agreement = rep.series_agreement.max((series - &p).amax());
        for &b in &boundary {
            for &x in probes.iter().chain(std::iter::once(&b)) {
                rep.boundary = rep.boundary.max(k.value(b, x, t)?.abs()).max(k.value(x, b, t)?.abs());
            }
        }
        for &s in t_grid {
            let lhs = k.matrix(s + t)?;
            let rhs = k.matrix(s)? * &p;
            rep.semigroup = rep.semigroup.max((lhs - rhs).amax());
        }
    }
    if rep.positivity_min == f64::INFINITY {
        rep.positivity_min = 0.0;
    }
    Ok(rep)
}

/// Outcome of a radius sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    /// The stopping rule fired.
    Converged,
    /// The schedule ran out first.
    NotConverged,
    /// A resource limit (vertex cap, dense limit, undefined law) cut the sweep short.
    Inconclusive,
    /// The ball stopped growing: the graph is finite and fully materialized.
    Exhausted,
}

/// Errors that end a sweep early without invalidating earlier radii.
pub(crate) fn is_resource_limit(e: &Error) -> bool {
    matches!(
        e,
        Error::Capacity { .. } | Error::DenseLimit { .. } | Error::InvalidLaw(_) | Error::InvalidGraph(_)
    )
}

pub(crate) fn check_schedule(radii: &[usize]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::Precondition("radius schedule is empty".into()));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("radii must be strictly increasing".into()));
    }
    Ok(())
}

/// Monotone sequence of Dirichlet kernel values over growing balls.
#[derive(Clone, Debug, Serialize)]
pub struct ExhaustionTrace {
    pub x: VertexId,
    pub y: VertexId,
    pub t: f64,
    pub tol: f64,
    pub radii: Vec<usize>,
    pub values: Vec<f64>,
    /// `values[k] - values[k-1]`; none at the first radius.
    pub deltas: Vec<Option<f64>>,
    pub status: TraceStatus,
    pub converged_at: Option<usize>,
    /// Last computed value, a lower bound for `p_t(x, y)`.
    pub lower_bound: Option<f64>,
    pub radial: bool,
    /// Why the sweep stopped early, if it did.
    pub note: Option<String>,
}

impl ExhaustionTrace {
    pub fn to_csv(&self) -> String {
        let rows = self.radii.iter().zip(&self.values).zip(&self.deltas).map(|((r, v), d)| {
            vec![
                r.to_string(),
                num(self.t),
                self.x.to_string(),
                self.y.to_string(),
                num(*v),
                opt_num(*d),
            ]
        });
        csv(&["radius", "t", "x", "y", "value", "delta"], rows)
    }
}

/// `p_t^r(x, y)` over the radius schedule, stopping once a delta drops below
/// `tol`. At `t = 0` the value is exact at the first radius.
pub fn exhaustion_kernel(
    g: &LazyGraph,
    x: &VertexId,
    y: &VertexId,
    t: f64,
    radii: &[usize],
    tol: f64,
    opts: &ComputeOptions,
) -> Result<ExhaustionTrace> {
    check_time(t)?;
    check_schedule(radii)?;
    if !(tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let root = g.root();
    let radial = opts.use_radial(g, *x == root || *y == root)?;
    let mut trace = ExhaustionTrace {
        x: x.clone(),
        y: y.clone(),
        t,
        tol,
        radii: Vec::new(),
        values: Vec::new(),
        deltas: Vec::new(),
        status: TraceStatus::NotConverged,
        converged_at: None,
        lower_bound: None,
        radial,
        note: None,
    };
    let mut last_size = None;
    for (k, &r) in radii.iter().enumerate() {
        let step = if radial {
            radial_kernel_value(g, x, y, t, r, k == 0)
        } else {
            dense_kernel_value(g, x, y, t, r, k == 0, opts).map(|(v, size)| {
                if last_size == Some(size) && k > 0 {
                    trace.status = TraceStatus::Exhausted;
                }
                last_size = Some(size);
                v
            })
        };
        let value = match step {
            Ok(v) => v,
            Err(e) if k > 0 && is_resource_limit(&e) => {
                trace.status = TraceStatus::Inconclusive;
                trace.note = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        let delta = trace.values.last().map(|prev| value - prev);
        trace.radii.push(r);
        trace.values.push(value);
        trace.deltas.push(delta);
        if trace.status == TraceStatus::Exhausted {
            trace.converged_at = Some(r);
            break;
        }
        let done = if t == 0.0 { k == 0 } else { delta.is_some_and(|d| d.abs() < tol) };
        if done {
            trace.status = TraceStatus::Converged;
            trace.converged_at = Some(r);
            break;
        }
    }
    trace.lower_bound = trace.values.last().copied();
    Ok(trace)
}

fn dense_kernel_value(
    g: &LazyGraph,
    x: &VertexId,
    y: &VertexId,
    t: f64,
    r: usize,
    first: bool,
    opts: &ComputeOptions,
) -> Result<(f64, usize)> {
    let ball = materialize_ball_at(g, &g.root(), r, opts.capacity)?;
    let (i, j) = (ball.require(x)?, ball.require(y)?);
    if first {
        for v in [i, j] {
            if !ball.is_interior(v) {
                return Err(Error::Precondition(format!(
                    "{} is not interior to the ball of radius {r}",
                    ball.id(v)
                )));
            }
        }
    }
    let k = HeatKernel::with_limit(&ball, opts.dense_limit)?;
    Ok((k.value(i, j, t)?, ball.len()))
}

fn radial_kernel_value(
    g: &LazyGraph,
    x: &VertexId,
    y: &VertexId,
    t: f64,
    r: usize,
    first: bool,
) -> Result<f64> {
    let q = RadialQuotient::of_graph(g, r).ok_or(Error::NotAModelBall)??;
    let other = if *x == g.root() { y } else { x };
    let cell = q.cell_of(other).ok_or_else(|| Error::UnknownVertex(other.clone()))?;
    if first && (q.cells()[cell].distance >= r) {
        return Err(Error::Precondition(format!(
            "{other} is not interior to the ball of radius {r}"
        )));
    }
    if !g.contains(other) {
        return Err(Error::UnknownVertex(other.clone()));
    }
    Ok(q.root_kernel(t)?.values()[cell])
}

/// `sum_y p_t^r(x, y)` over the radius schedule; the mass increases with `r`.
pub fn exhaustion_mass(
    g: &LazyGraph,
    x: &VertexId,
    t: f64,
    radii: &[usize],
    opts: &ComputeOptions,
) -> Result<Vec<(usize, f64)>> {
    check_time(t)?;
    check_schedule(radii)?;
    let radial = opts.use_radial(g, *x == g.root())?;
    let mut out = Vec::new();
    for &r in radii {
        let step = if radial {
            RadialQuotient::of_graph(g, r)
                .ok_or(Error::NotAModelBall)?
                .and_then(|q| q.root_kernel(t))
                .map(|k| k.mass_at(t))
        } else {
            materialize_ball_at(g, &g.root(), r, opts.capacity).and_then(|ball| {
                let i = ball.require(x)?;
                HeatKernel::with_limit(&ball, opts.dense_limit)?.mass(i, t)
            })
        };
        match step {
            Ok(m) => out.push((r, m)),
            Err(e) if !out.is_empty() && is_resource_limit(&e) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// `max p_t^r(x, y) - p_t^{r+1}(x, y)` over interior pairs of the smaller
/// ball, where `small` and `big` are concentric balls of consecutive radii.
/// Non-positive up to rounding.
pub fn exhaustion_step_violation(small: &Ball, big: &Ball, t_grid: &[f64]) -> Result<f64> {
    if small.center() != big.center() || small.radius() + 1 != big.radius() {
        return Err(Error::Precondition("balls must be concentric with consecutive radii".into()));
    }
    let (ks, kb) = (HeatKernel::new(small)?, HeatKernel::new(big)?);
    let pos: Vec<usize> = ks
        .reduced()
        .indices()
        .iter()
        .map(|&i| {
            let j = big.require(small.id(i))?;
            kb.reduced().position(j).ok_or_else(|| Error::BoundaryVertex(small.id(i).clone()))
        })
        .collect::<Result<_>>()?;
    let mut worst = f64::NEG_INFINITY;
    for &t in t_grid {
        let (ps, pb) = (ks.matrix(t)?, kb.matrix(t)?);
        for a in 0..pos.len() {
            for b in 0..pos.len() {
                worst = worst.max(ps[(a, b)] - pb[(pos[a], pos[b])]);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{materialize_ball, GraphSpec};
    use approx::assert_relative_eq;

    fn preset(name: &str) -> LazyGraph {
        GraphSpec::preset(name).unwrap().build().unwrap()
    }

    #[test]
    fn one_by_one() {
        let b = materialize_ball(&preset("p3"), 1).unwrap();
        let k = HeatKernel::new(&b).unwrap();
        assert_eq!(k.spectral().eigenvalues[0], 2.0);
        assert_eq!(k.spectral().eigenvectors[(0, 0)], 1.0);
        let v = k.reduced().indices()[0];
        assert_relative_eq!(k.value(v, v, 2f64.ln() / 2.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(k.mass(v, 1.0).unwrap(), (-2.0f64).exp(), epsilon = 1e-15);
        assert_eq!(k.mass(v, 0.0).unwrap(), 1.0);
        let end = b.boundary()[0];
        assert_eq!(k.value(end, v, 1.0).unwrap(), 0.0);
        assert!(k.mass(end, 1.0).is_err());
        assert!(k.value(v, v, -1.0).is_err());
        let s = semigroup_series(k.reduced(), 1.0).unwrap();
        assert_relative_eq!(s.value[(0, 0)], (-2.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn star_smallest_eigenvalue() {
        let b = materialize_ball(&preset("binary"), 2).unwrap();
        let k = HeatKernel::new(&b).unwrap();
        assert_relative_eq!(k.spectral().eigenvalues[0], 1.2679491924311228, epsilon = 1e-12);
        assert!(k.spectral().eigenvalues.iter().all(|&l| l > 0.0));
        let series = semigroup_series(k.reduced(), 0.5).unwrap().value;
        assert!((series - k.matrix(0.5).unwrap()).amax() <= 1e-9);
        let rep = verify_kernel_properties(&k, &[0.3]).unwrap();
        assert!(rep.semigroup <= 1e-10);
        assert!(rep.positivity_min > 0.0);
    }

    #[test]
    fn t_zero_trace_is_delta() {
        let g = preset("ray");
        let root = g.root();
        let tr = exhaustion_kernel(&g, &root, &root, 0.0, &[2, 4, 6], 1e-8, &ComputeOptions::default()).unwrap();
        assert_eq!(tr.values, vec![1.0]);
        assert_eq!(tr.status, TraceStatus::Converged);
        assert_eq!(tr.converged_at, Some(2));
    }

    #[test]
    fn radial_and_dense_kernels_agree() {
        for name in ["binary", "grafted", "increasing", "ray"] {
            let g = preset(name);
            for r in 1..=4 {
                let ball = materialize_ball(&g, r).unwrap();
                let k = HeatKernel::new(&ball).unwrap();
                let q = RadialQuotient::of_graph(&g, r).unwrap().unwrap();
                for t in [0.1, 1.0, 3.0] {
                    let rk = q.root_kernel(t).unwrap();
                    let row = k.row(0, t).unwrap();
                    let vals = rk.values();
                    for i in 0..ball.len() {
                        let c = q.cell_of(ball.id(i)).unwrap();
                        assert!((row[i] - vals[c]).abs() < 1e-12, "{name} r={r} t={t}");
                    }
                    assert!((k.mass(0, t).unwrap() - rk.mass_at(t)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn schedule_validation() {
        let g = preset("ray");
        let root = g.root();
        let o = ComputeOptions::default();
        assert!(exhaustion_kernel(&g, &root, &root, 1.0, &[3, 3], 1e-8, &o).is_err());
        assert!(exhaustion_kernel(&g, &root, &root, 1.0, &[], 1e-8, &o).is_err());
        let far = VertexId::path(&[0, 0, 0]);
        let dense = ComputeOptions { backend: crate::options::Backend::Dense, ..o };
        assert!(exhaustion_kernel(&g, &far, &root, 1.0, &[2, 4], 1e-8, &dense).is_err());
        assert!(exhaustion_kernel(&g, &far, &root, 1.0, &[2, 4], 1e-8, &o).is_err());
    }

    #[test]
    fn capacity_gives_inconclusive_trace() {
        let g = preset("binary");
        let root = g.root();
        let o = ComputeOptions {
            capacity: 50,
            backend: crate::options::Backend::Dense,
            ..Default::default()
        };
        let tr = exhaustion_kernel(&g, &root, &root, 1.0, &[2, 3, 4, 5], 1e-12, &o).unwrap();
        assert_eq!(tr.status, TraceStatus::Inconclusive);
        assert_eq!(tr.radii, vec![2, 3, 4]);
        assert!(tr.note.unwrap().contains("capacity"));
    }

    #[test]
    fn step_violation_is_rounding() {
        let g = GraphSpec::preset("grafted").unwrap().build().unwrap();
        let (a, b) = (materialize_ball(&g, 2).unwrap(), materialize_ball(&g, 3).unwrap());
        assert!(exhaustion_step_violation(&a, &b, &[0.1, 1.0, 5.0]).unwrap() <= 1e-12);
        assert!(exhaustion_step_violation(&b, &a, &[1.0]).is_err());
    }
}
