//! Bottom of the spectrum: exhaustion, Rayleigh quotients, Cheeger ratios,
//! geometric lower bounds, positive λ-harmonic witnesses and annulus traces.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::completeness::solve_dirichlet;
use crate::error::{Error, Result};
use crate::graph::{materialize_ball_at, valence_profile, Ball, BranchingLaw, LazyGraph, ValenceProfile, VertexId};
use crate::heat::{check_schedule, is_resource_limit, TraceStatus};
use crate::linalg::{smallest_symmetric_eigenvalue, symmetric_eigen};
use crate::operators::{assemble_on, ReducedLaplacian};
use crate::options::ComputeOptions;
use crate::output::{csv, num, opt_num};
use crate::quotient::RadialQuotient;

/// Smallest eigenpair of a reduced Laplacian. The eigenvector is indexed by
/// reduced position, has unit norm and a positive sum.
pub fn lambda0_ball(l: &ReducedLaplacian) -> Result<(f64, Vec<f64>)> {
    if l.dim() == 0 {
        return Err(Error::EmptyInterior);
    }
    let (values, vectors) = symmetric_eigen(l.matrix())?;
    let mut f: Vec<f64> = vectors.column(0).iter().copied().collect();
    if f.iter().sum::<f64>() < 0.0 {
        f.iter_mut().for_each(|x| *x = -*x);
    }
    Ok((values[0], f))
}

/// Extend a function on reduced positions by zero to the whole ball.
pub fn lift(l: &ReducedLaplacian, f: &[f64], ball_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; ball_len];
    for (&i, &x) in l.indices().iter().zip(f) {
        out[i] = x;
    }
    out
}

/// `<df, df> / <f, f>` for `f` vanishing on the boundary of the ball.
pub fn rayleigh_quotient(ball: &Ball, f: &[f64]) -> Result<f64> {
    if f.len() != ball.len() {
        return Err(Error::LengthMismatch {
            expected: ball.len(),
            found: f.len(),
        });
    }
    if let Some(i) = (0..ball.len()).find(|&i| !ball.is_interior(i) && f[i] != 0.0) {
        return Err(Error::Precondition(format!("f does not vanish at boundary vertex {}", ball.id(i))));
    }
    let norm: f64 = f.iter().map(|x| x * x).sum();
    if norm == 0.0 {
        return Err(Error::Precondition("f is identically zero".into()));
    }
    let energy: f64 = ball.edges().iter().map(|&(i, j)| (f[i] - f[j]).powi(2)).sum();
    Ok(energy / norm)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheegerRatios {
    pub size: usize,
    /// `L(∂D)`: edges of the full graph with exactly one endpoint in `D`.
    pub boundary_edges: f64,
    /// `A(D) = sum of m(x)` over `D`.
    pub area: f64,
    pub area_ratio: f64,
    pub volume_ratio: f64,
}

impl CheegerRatios {
    fn new(size: f64, boundary_edges: f64, area: f64) -> Self {
        Self {
            size: size as usize,
            boundary_edges,
            area,
            area_ratio: boundary_edges / area,
            volume_ratio: boundary_edges / size,
        }
    }
}

/// Isoperimetric ratios of a connected vertex set of the ball. Valences are
/// those of the full graph, so `D` may touch the boundary sphere.
pub fn cheeger_ratios(ball: &Ball, d: &[usize]) -> Result<CheegerRatios> {
    if d.is_empty() {
        return Err(Error::Precondition("the vertex set is empty".into()));
    }
    if let Some(&i) = d.iter().find(|&&i| i >= ball.len()) {
        return Err(Error::IndexOutOfRange(i));
    }
    let set: BTreeSet<usize> = d.iter().copied().collect();
    let mut seen = BTreeSet::from([d[0]]);
    let mut queue = VecDeque::from([d[0]]);
    while let Some(x) = queue.pop_front() {
        for &y in ball.neighbors(x) {
            if set.contains(&y) && seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    if seen.len() != set.len() {
        return Err(Error::Disconnected);
    }
    let mut boundary = 0;
    let mut area = 0;
    for &x in &set {
        let inside = ball.neighbors(x).iter().filter(|y| set.contains(y)).count();
        boundary += ball.valence(x) - inside;
        area += ball.valence(x);
    }
    Ok(CheegerRatios::new(set.len() as f64, boundary as f64, area as f64))
}

/// Ratios of the concentric balls `B_k(center)`, `k = 0..radius`, inside `ball`.
pub fn cheeger_samples(ball: &Ball) -> Result<Vec<CheegerRatios>> {
    (0..ball.radius())
        .map(|k| {
            let d: Vec<usize> = (0..ball.len()).filter(|&i| ball.distance(i) <= k).collect();
            cheeger_ratios(ball, &d)
        })
        .collect()
}

/// Lower bounds from `c = min (m_out(x) - m_in(x)) / m(x)` over a region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometricBounds {
    pub c: f64,
    pub m_min: f64,
    /// `c² / 2`, bounding `λ₀(Δ_bd)`; none unless `c > 0`.
    pub bound_bd: Option<f64>,
    /// `c² m_min / 2`, bounding `λ₀(Δ)`; none unless `c > 0`.
    pub bound_full: Option<f64>,
}

impl GeometricBounds {
    fn from_ratios(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let (mut c, mut m_min) = (f64::INFINITY, f64::INFINITY);
        for (ratio, m) in pairs {
            c = c.min(ratio);
            m_min = m_min.min(m);
        }
        if !c.is_finite() {
            return Err(Error::EmptyInterior);
        }
        let ok = c > 0.0;
        Ok(Self {
            c,
            m_min,
            bound_bd: ok.then(|| c * c / 2.0),
            bound_full: ok.then(|| c * c * m_min / 2.0),
        })
    }

    pub fn applicable(&self) -> bool {
        self.c > 0.0
    }
}

/// Bounds over every vertex of the profiled ball, root included.
pub fn geometric_bounds(profile: &ValenceProfile) -> Result<GeometricBounds> {
    geometric_bounds_on(profile, 0..profile.valence.len())
}

/// Bounds over the listed ball vertices.
pub fn geometric_bounds_on(profile: &ValenceProfile, vertices: impl IntoIterator<Item = usize>) -> Result<GeometricBounds> {
    GeometricBounds::from_ratios(vertices.into_iter().map(|i| {
        let m = profile.valence[i] as f64;
        ((profile.m_out[i] as f64 - profile.m_in[i] as f64) / m, m)
    }))
}

/// Bounds over spheres `from..=to` of the model tree of `law` with `arms`
/// rays glued to the root.
pub fn law_geometric_bounds(law: &BranchingLaw, arms: usize, from: usize, to: usize) -> Result<GeometricBounds> {
    let mut pairs = Vec::new();
    for r in from..=to {
        let n = law.n_f64(r as u64)?;
        if r == 0 {
            pairs.push((1.0, n + arms as f64));
        } else {
            pairs.push(((n - 1.0) / (n + 1.0), n + 1.0));
            if arms > 0 {
                pairs.push((0.0, 2.0));
            }
        }
    }
    GeometricBounds::from_ratios(pairs)
}

/// `λ₀` of the Dirichlet Laplacian on balls about the root.
#[derive(Clone, Debug, Serialize)]
pub struct Lambda0Trace {
    pub radii: Vec<usize>,
    pub values: Vec<f64>,
    /// Ratios of `B_{r-1}` inside `B_r`, per radius.
    pub cheeger: Vec<CheegerRatios>,
    /// Geometric bounds over the largest ball reached.
    pub geometric: Option<GeometricBounds>,
    pub tol: f64,
    pub status: TraceStatus,
    /// Last value; an upper bound for `λ₀` of the whole graph.
    pub estimate: Option<f64>,
    pub radial: bool,
    pub note: Option<String>,
}

impl Lambda0Trace {
    pub fn to_csv(&self) -> String {
        let bound = self.geometric.and_then(|g| g.bound_full);
        let rows = self.radii.iter().zip(&self.values).zip(&self.cheeger).map(|((r, v), ch)| {
            vec![
                r.to_string(),
                num(*v),
                opt_num(bound),
                num(ch.area_ratio),
                num(ch.volume_ratio),
            ]
        });
        csv(&["radius", "lambda0", "geometric_bound", "cheeger_area_ratio", "cheeger_volume_ratio"], rows)
    }

    /// `max λ₀^{r+1} - λ₀^r`; non-positive for a monotone trace.
    pub fn max_increase(&self) -> f64 {
        self.values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn dense_lambda0(g: &LazyGraph, r: usize, opts: &ComputeOptions) -> Result<(f64, CheegerRatios, Ball)> {
    let ball = materialize_ball_at(g, &g.root(), r, opts.capacity)?;
    let l = assemble_on(&ball, ball.interior(), opts.dense_limit)?;
    if l.dim() == 0 {
        return Err(Error::EmptyInterior);
    }
    let value = smallest_symmetric_eigenvalue(l.matrix())?;
    let inner: Vec<usize> = (0..ball.len()).filter(|&i| ball.distance(i) < r).collect();
    let ch = cheeger_ratios(&ball, &inner)?;
    Ok((value, ch, ball))
}

/// Ratios of the root-centered ball of radius `r - 1` in a radial quotient.
fn quotient_cheeger(q: &RadialQuotient, r: usize) -> CheegerRatios {
    let (mut size, mut boundary, mut area) = (0.0, 0.0, 0.0);
    for cell in q.cells().iter().filter(|c| c.distance < r) {
        let s = cell.ln_size.exp();
        size += s;
        area += s * cell.valence;
        if cell.distance + 1 == r {
            let inward = if cell.distance == 0 { 0.0 } else { 1.0 };
            boundary += s * (cell.valence - inward);
        }
    }
    CheegerRatios::new(size, boundary, area)
}

/// `λ₀^r` over the radius schedule. Values never increase with `r`; the last
/// one is an upper bound for `λ₀`. The status is `Converged` when the final
/// step moved less than `tol`.
pub fn lambda0_exhaustion(g: &LazyGraph, radii: &[usize], tol: f64, opts: &ComputeOptions) -> Result<Lambda0Trace> {
    check_schedule(radii)?;
    if !(tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let radial = opts.use_radial(g, true)?;
    let mut trace = Lambda0Trace {
        radii: Vec::new(),
        values: Vec::new(),
        cheeger: Vec::new(),
        geometric: None,
        tol,
        status: TraceStatus::NotConverged,
        estimate: None,
        radial,
        note: None,
    };
    let mut last_ball: Option<Ball> = None;
    for &r in radii {
        let step = if radial {
            RadialQuotient::of_graph(g, r)
                .ok_or(Error::NotAModelBall)?
                .and_then(|q| Ok((q.lambda0()?.0, quotient_cheeger(&q, r), None)))
        } else {
            dense_lambda0(g, r, opts).map(|(v, ch, ball)| (v, ch, Some(ball)))
        };
        let (value, ch, ball) = match step {
            Ok(s) => s,
            Err(e) if !trace.values.is_empty() && is_resource_limit(&e) => {
                trace.status = TraceStatus::Inconclusive;
                trace.note = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        let grew = match (&last_ball, &ball) {
            (Some(prev), Some(b)) => prev.len() != b.len(),
            _ => true,
        };
        trace.radii.push(r);
        trace.values.push(value);
        trace.cheeger.push(ch);
        if ball.is_some() {
            last_ball = ball;
        }
        if !grew {
            trace.status = TraceStatus::Exhausted;
            break;
        }
    }
    if trace.status == TraceStatus::NotConverged
        && trace.values.len() >= 2
        && trace.max_increase().is_finite()
        && (trace.values[trace.values.len() - 1] - trace.values[trace.values.len() - 2]).abs() < tol
    {
        trace.status = TraceStatus::Converged;
    }
    trace.estimate = trace.values.last().copied();
    let last_r = trace.radii.last().copied().unwrap_or(0);
    trace.geometric = match (&last_ball, g.radial_arms()) {
        (Some(ball), _) => geometric_bounds(&valence_profile(ball)).ok(),
        (None, Some((law, arms))) => law_geometric_bounds(law, arms, 0, last_r).ok(),
        (None, None) => None,
    };
    Ok(trace)
}

/// Normalized Dirichlet solutions `u_r = v_r / v_r(x0)` of `Δu = λu`, with
/// `v_r = 1` on the boundary sphere, sampled at fixed probe vertices.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessTrace {
    pub lambda: f64,
    pub radii: Vec<usize>,
    pub lambda0: Vec<f64>,
    pub probes: Vec<VertexId>,
    /// `values[k][p]` is `u` at probe `p` on the ball of radius `radii[k]`.
    pub values: Vec<Vec<f64>>,
    /// Smallest `u` over every interior vertex and radius.
    pub min_value: f64,
    /// Largest `u(x) / prod_{j < r(x)} (M(j) - λ)` over every vertex and radius.
    pub max_bound_ratio: f64,
    pub radial: bool,
    pub note: Option<String>,
}

impl WitnessTrace {
    /// Last change of each probe value; `None` with fewer than two radii.
    pub fn last_deltas(&self) -> Vec<Option<f64>> {
        let k = self.values.len();
        (0..self.probes.len())
            .map(|p| (k >= 2).then(|| self.values[k - 1][p] - self.values[k - 2][p]))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut rows = Vec::new();
        for (k, &r) in self.radii.iter().enumerate() {
            for (p, id) in self.probes.iter().enumerate() {
                rows.push(vec![r.to_string(), num(self.lambda0[k]), id.to_string(), num(self.values[k][p])]);
            }
        }
        csv(&["radius", "lambda0", "vertex", "u"], rows)
    }
}

/// `prod_{j < d} (M(j) - λ)` for `d = 0..=max.len()`.
fn product_bounds_by_distance(max: &[f64], lambda: f64) -> Vec<f64> {
    let mut out = vec![1.0];
    for m in max {
        out.push(out.last().unwrap() * (m - lambda));
    }
    out
}

struct WitnessStep {
    lambda0: f64,
    /// `(u, distance, interior)` per vertex or cell.
    u: Vec<(f64, usize, bool)>,
    max: Vec<f64>,
    probes: Vec<f64>,
}

fn dense_witness(g: &LazyGraph, lambda: f64, r: usize, probes: &mut Vec<VertexId>, opts: &ComputeOptions) -> Result<WitnessStep> {
    let ball = materialize_ball_at(g, &g.root(), r, opts.capacity)?;
    let l = assemble_on(&ball, ball.interior(), opts.dense_limit)?;
    if l.dim() == 0 {
        return Err(Error::EmptyInterior);
    }
    if l.dim() == ball.len() {
        return Err(Error::EmptyBoundary);
    }
    let lambda0 = smallest_symmetric_eigenvalue(l.matrix())?;
    check_below(lambda, lambda0, r)?;
    let v = solve_dirichlet(&ball, ball.interior(), |_| 1.0, lambda, false, opts.dense_limit)?;
    if probes.is_empty() {
        probes.extend(ball.spheres()[..r].iter().map(|s| ball.id(s[0]).clone()));
    }
    let probe_values = probes
        .iter()
        .map(|id| ball.require(id).map(|i| v[i] / v[0]))
        .collect::<Result<_>>()?;
    let profile = valence_profile(&ball);
    Ok(WitnessStep {
        lambda0,
        u: (0..ball.len())
            .map(|i| (v[i] / v[0], ball.distance(i), ball.is_interior(i)))
            .collect(),
        max: profile.max.iter().map(|&m| m as f64).collect(),
        probes: probe_values,
    })
}

fn radial_witness(g: &LazyGraph, lambda: f64, r: usize, probes: &mut Vec<VertexId>) -> Result<WitnessStep> {
    let q = RadialQuotient::of_graph(g, r).ok_or(Error::NotAModelBall)??;
    let (lambda0, _) = q.lambda0()?;
    check_below(lambda, lambda0, r)?;
    let v = q.boundary_one(lambda)?;
    if probes.is_empty() {
        probes.extend((0..r).map(|d| VertexId::Path(vec![0; d])));
    }
    let probe_values = probes
        .iter()
        .map(|id| {
            q.cell_of(id)
                .map(|c| v[c] / v[0])
                .ok_or_else(|| Error::UnknownVertex(id.clone()))
        })
        .collect::<Result<_>>()?;
    let mut max = vec![0.0; r + 1];
    for cell in q.cells() {
        max[cell.distance] = f64::max(max[cell.distance], cell.valence);
    }
    Ok(WitnessStep {
        lambda0,
        u: q.cells()
            .iter()
            .enumerate()
            .map(|(c, cell)| (v[c] / v[0], cell.distance, cell.distance < r))
            .collect(),
        max,
        probes: probe_values,
    })
}

fn check_below(lambda: f64, lambda0: f64, r: usize) -> Result<()> {
    if lambda < lambda0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "λ = {lambda} is not below λ₀ = {lambda0} of the ball of radius {r}"
        )))
    }
}

/// Positive λ-harmonic approximants on root-centered balls, for `λ` below
/// every `λ₀^r` of the schedule. Probes default to one vertex per interior
/// sphere of the first ball.
pub fn positive_harmonic_witness(g: &LazyGraph, lambda: f64, radii: &[usize], opts: &ComputeOptions) -> Result<WitnessTrace> {
    check_schedule(radii)?;
    if !lambda.is_finite() {
        return Err(Error::Precondition("λ must be finite".into()));
    }
    let radial = opts.use_radial(g, true)?;
    let mut trace = WitnessTrace {
        lambda,
        radii: Vec::new(),
        lambda0: Vec::new(),
        probes: Vec::new(),
        values: Vec::new(),
        min_value: f64::INFINITY,
        max_bound_ratio: 0.0,
        radial,
        note: None,
    };
    for &r in radii {
        let step = if radial {
            radial_witness(g, lambda, r, &mut trace.probes)
        } else {
            dense_witness(g, lambda, r, &mut trace.probes, opts)
        };
        let step = match step {
            Ok(s) => s,
            Err(e) if !trace.radii.is_empty() && is_resource_limit(&e) => {
                trace.note = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        let bound = product_bounds_by_distance(&step.max, lambda);
        for &(u, d, interior) in &step.u {
            if interior {
                trace.min_value = trace.min_value.min(u);
            }
            trace.max_bound_ratio = trace.max_bound_ratio.max(u / bound[d]);
        }
        trace.radii.push(r);
        trace.lambda0.push(step.lambda0);
        trace.values.push(step.probes);
    }
    Ok(trace)
}

/// `λ₀` of the annulus `inner < r(x) < outer` with Dirichlet conditions on
/// both sides, per inner radius.
#[derive(Clone, Debug, Serialize)]
pub struct ExteriorTrace {
    pub outer: usize,
    pub inner_radii: Vec<usize>,
    pub values: Vec<f64>,
    /// `c² m_min / 2` over the annulus vertices, when `c > 0` there.
    pub bounds: Vec<Option<f64>>,
    pub radial: bool,
}

impl ExteriorTrace {
    pub fn to_csv(&self) -> String {
        let rows = self
            .inner_radii
            .iter()
            .zip(&self.values)
            .zip(&self.bounds)
            .map(|((r, v), b)| vec![r.to_string(), self.outer.to_string(), num(*v), opt_num(*b)]);
        csv(&["inner_radius", "outer_radius", "lambda0", "geometric_bound"], rows)
    }
}

pub fn exterior_lambda0_trace(g: &LazyGraph, inner_radii: &[usize], outer: usize, opts: &ComputeOptions) -> Result<ExteriorTrace> {
    check_schedule(inner_radii)?;
    if let Some(&r) = inner_radii.iter().find(|&&r| r + 1 >= outer) {
        return Err(Error::Precondition(format!("the annulus between {r} and {outer} has no interior")));
    }
    let radial = opts.use_radial(g, true)?;
    let mut trace = ExteriorTrace {
        outer,
        inner_radii: inner_radii.to_vec(),
        values: Vec::new(),
        bounds: Vec::new(),
        radial,
    };
    if radial {
        let q = RadialQuotient::of_graph(g, outer).ok_or(Error::NotAModelBall)??;
        let (law, arms) = g.radial_arms().ok_or(Error::NotAModelBall)?;
        for &r in inner_radii {
            trace.values.push(q.lambda0_beyond(Some(r))?.0);
            trace.bounds.push(law_geometric_bounds(law, arms, r + 1, outer - 1)?.bound_full);
        }
    } else {
        let ball = materialize_ball_at(g, &g.root(), outer, opts.capacity)?;
        let profile = valence_profile(&ball);
        for &r in inner_radii {
            let subset: Vec<usize> = ball.interior().iter().copied().filter(|&i| ball.distance(i) > r).collect();
            if subset.is_empty() {
                return Err(Error::EmptyInterior);
            }
            let l = assemble_on(&ball, &subset, opts.dense_limit)?;
            trace.values.push(smallest_symmetric_eigenvalue(l.matrix())?);
            trace.bounds.push(geometric_bounds_on(&profile, subset)?.bound_full);
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_model_tree, graft_ray, materialize_ball, GraphSpec};
    use crate::operators::assemble_reduced;
    use crate::options::Backend;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn preset(name: &str) -> LazyGraph {
        GraphSpec::preset(name).unwrap().build().unwrap()
    }

    fn dense() -> ComputeOptions {
        ComputeOptions {
            backend: Backend::Dense,
            ..Default::default()
        }
    }

    #[test]
    fn small_balls() {
        let b = materialize_ball(&preset("line"), 1).unwrap();
        let (l0, f) = lambda0_ball(&assemble_reduced(&b).unwrap()).unwrap();
        assert_eq!((l0, f.len()), (2.0, 1));
        let b = materialize_ball(&build_model_tree(BranchingLaw::regular(3).unwrap()), 1).unwrap();
        assert_eq!(lambda0_ball(&assemble_reduced(&b).unwrap()).unwrap().0, 3.0);
        let b = materialize_ball(&preset("star"), 2).unwrap();
        let l = assemble_reduced(&b).unwrap();
        let (l0, f) = lambda0_ball(&l).unwrap();
        assert_relative_eq!(l0, 3.0 - 3f64.sqrt(), epsilon = 1e-12);
        assert!(f.iter().all(|&x| x > 0.0));
        let q = rayleigh_quotient(&b, &lift(&l, &f, b.len())).unwrap();
        assert_relative_eq!(q, l0, epsilon = 1e-10);
    }

    #[test]
    fn binary_radius_two_matches_star() {
        let b = materialize_ball(&preset("binary"), 2).unwrap();
        let l0 = lambda0_ball(&assemble_reduced(&b).unwrap()).unwrap().0;
        assert_relative_eq!(l0, 3.0 - 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn delta_and_boundary_checks() {
        let b = materialize_ball(&preset("ternary"), 3).unwrap();
        let mut f = vec![0.0; b.len()];
        f[2] = 1.0;
        assert_eq!(rayleigh_quotient(&b, &f).unwrap(), 4.0);
        assert!(rayleigh_quotient(&b, &vec![0.0; b.len()]).is_err());
        f[b.boundary()[0]] = 1.0;
        assert!(rayleigh_quotient(&b, &f).is_err());
    }

    #[test]
    fn cheeger_examples() {
        let b = materialize_ball(&preset("ternary"), 2).unwrap();
        let single = cheeger_ratios(&b, &[1]).unwrap();
        assert_eq!((single.boundary_edges, single.area_ratio), (4.0, 1.0));
        let tri = materialize_ball(&build_model_tree(BranchingLaw::regular(3).unwrap()), 3).unwrap();
        let one: Vec<usize> = (0..tri.len()).filter(|&i| tri.distance(i) <= 1).collect();
        let ch = cheeger_ratios(&tri, &one).unwrap();
        assert_eq!((ch.boundary_edges, ch.area, ch.area_ratio), (6.0, 12.0, 0.5));
        let leaves = tri.spheres()[1].clone();
        assert!(matches!(cheeger_ratios(&tri, &leaves), Err(Error::Disconnected)));
    }

    #[test]
    fn ray_pieces_on_grafted_graph() {
        let g = preset("grafted");
        let center = VertexId::Ray { level: 1, step: 12 };
        let b = materialize_ball_at(&g, &center, 10, 10_000).unwrap();
        for k in 1..=15 {
            let d: Vec<usize> = (0..k).map(|s| b.require(&VertexId::Ray { level: 1, step: 5 + s as u64 }).unwrap()).collect();
            let ch = cheeger_ratios(&b, &d).unwrap();
            assert_eq!(ch.boundary_edges, 2.0);
            assert_relative_eq!(ch.volume_ratio, 2.0 / k as f64);
        }
    }

    #[test]
    fn geometric_examples() {
        for m in 3..6u64 {
            let b = materialize_ball(&build_model_tree(BranchingLaw::regular(m).unwrap()), 3).unwrap();
            let gb = geometric_bounds(&valence_profile(&b)).unwrap();
            let mf = m as f64;
            assert_relative_eq!(gb.c, (mf - 2.0) / mf, epsilon = 1e-15);
            assert_relative_eq!(gb.bound_full.unwrap(), (mf - 2.0).powi(2) / (2.0 * mf), epsilon = 1e-15);
            let lb = law_geometric_bounds(&BranchingLaw::regular(m).unwrap(), 0, 0, 5).unwrap();
            assert_eq!(lb, gb);
        }
        let ray = materialize_ball(&preset("ray"), 4).unwrap();
        let gb = geometric_bounds(&valence_profile(&ray)).unwrap();
        assert_eq!(gb.c, 0.0);
        assert!(!gb.applicable() && gb.bound_bd.is_none());
    }

    #[test]
    fn ray_exhaustion_closed_form() {
        let t = lambda0_exhaustion(&preset("ray"), &[1, 2, 3, 5, 8], 1e-12, &dense()).unwrap();
        for (&r, &v) in t.radii.iter().zip(&t.values) {
            let expected = 2.0 - 2.0 * (std::f64::consts::PI / (2 * r + 1) as f64).cos();
            assert_relative_eq!(v, expected, epsilon = 1e-12);
        }
        assert!(t.max_increase() < 0.0);
    }

    #[test]
    fn three_regular_exhaustion() {
        let g = build_model_tree(BranchingLaw::regular(3).unwrap());
        let radii: Vec<usize> = (2..=10).collect();
        let fast = lambda0_exhaustion(&g, &radii, 1e-9, &ComputeOptions::default()).unwrap();
        assert!(fast.radial);
        assert_relative_eq!(fast.values[0], 3.0 - 3f64.sqrt(), epsilon = 1e-12);
        assert!(fast.max_increase() <= 1e-12);
        assert!(fast.values.iter().all(|&v| v >= 1.0 / 6.0 - 1e-9));
        assert_relative_eq!(fast.geometric.unwrap().bound_full.unwrap(), 1.0 / 6.0, epsilon = 1e-15);
        let slow = lambda0_exhaustion(&g, &[2, 3, 4, 5, 6], 1e-9, &dense()).unwrap();
        for k in 0..5 {
            assert_relative_eq!(slow.values[k], fast.values[k], epsilon = 1e-11);
            assert_relative_eq!(slow.cheeger[k].area_ratio, fast.cheeger[k].area_ratio, epsilon = 1e-12);
        }
        let other = lambda0_exhaustion(&g, &[3, 6], 1e-9, &dense()).unwrap();
        assert_eq!(other.values[1].to_bits(), slow.values[4].to_bits());
    }

    #[test]
    fn finite_graph_is_exhausted() {
        let t = lambda0_exhaustion(&preset("p5"), &[1, 2, 3, 4], 1e-9, &dense());
        // Exterior degrees keep the ends on the boundary, so the ball keeps its size.
        let t = t.unwrap();
        assert_eq!(t.status, TraceStatus::Exhausted);
    }

    #[test]
    fn witness_examples() {
        for name in ["binary", "p5", "grafted"] {
            let w = positive_harmonic_witness(&preset(name), 0.0, &[2], &dense()).unwrap();
            assert!(w.values[0].iter().all(|&u| (u - 1.0).abs() < 1e-12), "{name}");
        }
        let g = build_model_tree(BranchingLaw::regular(3).unwrap());
        let radii: Vec<usize> = (3..=8).collect();
        for opts in [dense(), ComputeOptions::default()] {
            let w = positive_harmonic_witness(&g, 0.1, &radii, &opts).unwrap();
            assert!(w.min_value > 0.0);
            assert!(w.max_bound_ratio <= 1.0 + 1e-12);
            assert!(w.last_deltas().iter().all(|d| d.unwrap().abs() < 1e-2));
        }
        let err = positive_harmonic_witness(&g, 1.5, &[2, 3], &dense()).unwrap_err();
        assert!(err.to_string().contains("radius 2"));
    }

    #[test]
    fn witness_backends_agree() {
        let g = graft_ray(build_model_tree(BranchingLaw::constant(3, 2).unwrap()), &VertexId::root_path()).unwrap();
        let a = positive_harmonic_witness(&g, -0.5, &[2, 4, 6], &dense()).unwrap();
        let b = positive_harmonic_witness(&g, -0.5, &[2, 4, 6], &ComputeOptions::default()).unwrap();
        assert_eq!(a.probes.len(), b.probes.len());
        for k in 0..3 {
            assert_relative_eq!(a.lambda0[k], b.lambda0[k], epsilon = 1e-11);
        }
        let (da, db) = (&a.values[2], &b.values[2]);
        let ia = a.probes.iter().position(|p| *p == VertexId::root_path()).unwrap();
        assert_relative_eq!(da[ia], db[0]);
        assert_relative_eq!(a.max_bound_ratio, b.max_bound_ratio, epsilon = 1e-10);
    }

    #[test]
    fn exterior_examples() {
        let inc = build_model_tree(BranchingLaw::affine(3, 1, 2).unwrap());
        let inner = [1, 2, 3, 4, 5];
        let fast = exterior_lambda0_trace(&inc, &inner, 8, &ComputeOptions::default()).unwrap();
        for k in 0..5 {
            assert!(fast.values[k] >= fast.bounds[k].unwrap() - 1e-9);
        }
        let small = exterior_lambda0_trace(&inc, &[1, 2, 3], 5, &ComputeOptions::default()).unwrap();
        let slow = exterior_lambda0_trace(&inc, &[1, 2, 3], 5, &dense()).unwrap();
        for k in 0..3 {
            assert_relative_eq!(small.values[k], slow.values[k], epsilon = 1e-10);
            assert_relative_eq!(small.bounds[k].unwrap(), slow.bounds[k].unwrap(), epsilon = 1e-14);
        }
        assert!(fast.values.windows(2).all(|w| w[1] > w[0]));
        assert_relative_eq!(fast.bounds[0].unwrap(), 0.9, epsilon = 1e-14);
        assert!(exterior_lambda0_trace(&inc, &[7], 8, &dense()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn rayleigh_dominates_lambda0(which in 0usize..4, seed in any::<u64>()) {
            let name = ["binary", "grafted", "increasing", "star"][which];
            let b = materialize_ball(&preset(name), 3).unwrap();
            let l = assemble_reduced(&b).unwrap();
            let (l0, _) = lambda0_ball(&l).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..40 {
                let mut f = vec![0.0; b.len()];
                for &i in b.interior() {
                    f[i] = rng.random_range(-1.0..1.0);
                }
                prop_assert!(rayleigh_quotient(&b, &f).unwrap() >= l0 - 1e-10);
            }
        }

        #[test]
        fn cheeger_inequality_on_balls(which in 0usize..3, r in 2usize..5) {
            let law = [BranchingLaw::regular(3).unwrap(), BranchingLaw::affine(3, 1, 2).unwrap(), BranchingLaw::regular(5).unwrap()][which].clone();
            let b = materialize_ball(&build_model_tree(law), r).unwrap();
            let gb = geometric_bounds(&valence_profile(&b)).unwrap();
            prop_assert!(gb.c > 0.0 && gb.c <= 1.0);
            for ch in cheeger_samples(&b).unwrap() {
                prop_assert!(gb.c * ch.area <= ch.boundary_edges + 1e-9);
            }
        }
    }
}
