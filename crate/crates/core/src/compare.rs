//! Radial heat kernels of model trees and comparison with other graphs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{valence_profile, Ball, BranchingLaw};
use crate::heat::HeatKernel;
use crate::output::{csv, num};
use crate::quotient::RadialQuotient;

/// `ρ_t(r) = p_t(x0, x)` for `x` on sphere `r` of a model-tree ball.
#[derive(Clone, Debug, Serialize)]
pub struct RadialKernel {
    pub radius: usize,
    pub t_grid: Vec<f64>,
    /// `rho[k][r]` at time `t_grid[k]`.
    pub rho: Vec<Vec<f64>>,
    /// Max minus min of `p_t(x0, ·)` over each sphere.
    pub spread: Vec<Vec<f64>>,
}

impl RadialKernel {
    pub fn max_spread(&self) -> f64 {
        self.spread.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// `max ρ_t(r+1) - ρ_t(r)`; non-positive when `ρ` decreases in `r`.
    pub fn max_increase(&self) -> f64 {
        self.rho
            .iter()
            .flat_map(|row| row.windows(2).map(|w| w[1] - w[0]))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Radial kernel from the full Dirichlet kernel of a model-tree ball.
pub fn radial_kernel(ball: &Ball, t_grid: &[f64]) -> Result<RadialKernel> {
    if ball.model_law().is_none() {
        return Err(Error::NotAModelBall);
    }
    let k = HeatKernel::new(ball)?;
    let mut rho = Vec::new();
    let mut spread = Vec::new();
    for &t in t_grid {
        let row = k.row(0, t)?;
        let (mut r_row, mut s_row) = (Vec::new(), Vec::new());
        for sphere in ball.spheres() {
            let vals = sphere.iter().map(|&i| row[i]);
            let lo = vals.clone().fold(f64::INFINITY, f64::min);
            let hi = vals.clone().fold(f64::NEG_INFINITY, f64::max);
            r_row.push(vals.sum::<f64>() / sphere.len() as f64);
            s_row.push(hi - lo);
        }
        rho.push(r_row);
        spread.push(s_row);
    }
    Ok(RadialKernel {
        radius: ball.radius(),
        t_grid: t_grid.to_vec(),
        rho,
        spread,
    })
}

/// `ρ_t(r)` for `r = 0..=radius` from the radial quotient; no ball is built.
pub fn model_kernel(law: &BranchingLaw, radius: usize, t: f64) -> Result<Vec<f64>> {
    let q = RadialQuotient::new(law, 0, radius)?;
    Ok(q.root_kernel(t)?.values())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareMode {
    /// `ρ_t(r) <= p_t(x0, x)` when `M(r) <= n(r) + 1` and `m(x0) <= n(0)`.
    Comp1,
    /// `p_t(x0, x) <= ρ_t(r)` when `n(r) <= underline_m(r) - 1` and `n(0) <= m(x0)`.
    Comp2,
    /// `p_t(x0, x) <= ρ_t(r)` on a graph with `m_in = 1` and `n(r) <= m_out`.
    Generalized,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub r: usize,
    pub t: f64,
    pub rho: f64,
    pub p_min: f64,
    pub p_max: f64,
    /// Smallest slack of the asserted inequality on this sphere.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub mode: CompareMode,
    pub radius: usize,
    pub law: String,
    pub min_margin: f64,
    pub max_abs_margin: f64,
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    pub fn to_csv(&self) -> String {
        let rows = self.rows.iter().map(|row| {
            vec![
                row.r.to_string(),
                num(row.t),
                num(row.rho),
                num(row.p_min),
                num(row.p_max),
                num(row.margin),
            ]
        });
        csv(&["r", "t", "rho", "p_min_on_sphere", "p_max_on_sphere", "margin"], rows)
    }
}

fn check_hypothesis(ball: &Ball, law: &BranchingLaw, mode: CompareMode) -> Result<()> {
    let profile = valence_profile(ball);
    let fail = |msg: String| Err(Error::Precondition(msg));
    let m0 = ball.valence(0) as f64;
    let n0 = law.n_f64(0)?;
    match mode {
        CompareMode::Comp1 if m0 > n0 => return fail(format!("m(x0) = {m0} exceeds n(0) = {n0}")),
        CompareMode::Comp2 | CompareMode::Generalized if n0 > m0 => {
            return fail(format!("n(0) = {n0} exceeds m(x0) = {m0}"))
        }
        _ => {}
    }
    if mode == CompareMode::Generalized {
        for i in 1..ball.len() {
            if profile.m_in[i] != 1 {
                return fail(format!("{} has {} inward neighbors", ball.id(i), profile.m_in[i]));
            }
        }
    }
    for r in 1..ball.radius() {
        let n = law.n_f64(r as u64)?;
        match mode {
            CompareMode::Comp1 if profile.max[r] as f64 > n + 1.0 => {
                return fail(format!("M({r}) = {} exceeds n({r}) + 1 = {}", profile.max[r], n + 1.0))
            }
            CompareMode::Comp2 if n > profile.min[r] as f64 - 1.0 => {
                return fail(format!("n({r}) = {n} exceeds underline_m({r}) - 1 = {}", profile.min[r] as f64 - 1.0))
            }
            CompareMode::Generalized => {
                for &i in &ball.spheres()[r] {
                    if n > profile.m_out[i] as f64 {
                        return fail(format!("n({r}) = {n} exceeds m_out = {} at {}", profile.m_out[i], ball.id(i)));
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Compare the Dirichlet kernel of `ball` from its center with the radial
/// kernel of the model tree of `law` at the same radius.
pub fn compare_embedded(ball: &Ball, law: &BranchingLaw, t_grid: &[f64], mode: CompareMode) -> Result<CompareReport> {
    if !ball.centered_at_root() {
        return Err(Error::Precondition("ball must be centered at the graph root".into()));
    }
    if mode != CompareMode::Generalized && !ball.is_tree() {
        return Err(Error::NotATree);
    }
    check_hypothesis(ball, law, mode)?;
    let k = HeatKernel::new(ball)?;
    let q = RadialQuotient::new(law, 0, ball.radius())?;
    let mut rows = Vec::new();
    for &t in t_grid {
        let p = k.row(0, t)?;
        let rho = q.root_kernel(t)?.values();
        for (r, sphere) in ball.spheres().iter().enumerate() {
            let vals = sphere.iter().map(|&i| p[i]);
            let p_min = vals.clone().fold(f64::INFINITY, f64::min);
            let p_max = vals.fold(f64::NEG_INFINITY, f64::max);
            let margin = match mode {
                CompareMode::Comp1 => p_min - rho[r],
                CompareMode::Comp2 | CompareMode::Generalized => rho[r] - p_max,
            };
            rows.push(CompareRow {
                r,
                t,
                rho: rho[r],
                p_min,
                p_max,
                margin,
            });
        }
    }
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let max_abs_margin = rows.iter().map(|r| r.margin.abs()).fold(0.0, f64::max);
    Ok(CompareReport {
        mode,
        radius: ball.radius(),
        law: law.to_string(),
        min_margin,
        max_abs_margin,
        rows,
    })
}

pub fn compare_generalized_graph(ball: &Ball, law: &BranchingLaw, t_grid: &[f64]) -> Result<CompareReport> {
    compare_embedded(ball, law, t_grid, CompareMode::Generalized)
}

/// Default time grid for comparisons.
pub const DEFAULT_T_GRID: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];
