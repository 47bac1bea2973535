//! Numeric diagnostic and verdict fusion.

use serde::Serialize;
use serde_json::json;

use crate::completeness::criteria::{
    max_valence_criterion, min_valence_direction_criterion, model_tree_criterion, CriterionResult, Verdict,
};
use crate::completeness::dirichlet::boundary_one_with;
use crate::error::{Error, Result};
use crate::graph::{materialize_ball_at, LazyGraph};
use crate::heat::{check_schedule, is_resource_limit, TraceStatus};
use crate::options::ComputeOptions;
use crate::output::{csv, num, opt_num};
use crate::quotient::RadialQuotient;

/// Limit estimates at or above this count as bounded away from 0.
pub const POSITIVE_THRESHOLD: f64 = 1e-4;
/// Consecutive small deltas required before a trace counts as stable.
pub const STABLE_RUN: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericEvidence {
    /// Stable limit bounded away from 0: a positive bounded λ-harmonic
    /// function appears to exist.
    SupportsIncomplete,
    /// Values decay toward 0. Never conclusive on its own.
    SupportsComplete,
    None,
}

/// `v_r(root)` for the boundary-one λ-solutions on growing balls.
#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticTrace {
    pub lambda: f64,
    pub tol: f64,
    pub radii: Vec<usize>,
    pub values: Vec<f64>,
    pub deltas: Vec<Option<f64>>,
    pub status: TraceStatus,
    /// Radius at which the last of `STABLE_RUN` consecutive deltas fell below `tol`.
    pub stabilized_at: Option<usize>,
    /// Last value; the sequence decreases, so this is an upper bound on the limit.
    pub limit_estimate: Option<f64>,
    pub evidence: NumericEvidence,
    pub radial: bool,
    pub note: Option<String>,
}

impl DiagnosticTrace {
    pub fn to_csv(&self) -> String {
        let rows = self.radii.iter().zip(&self.values).zip(&self.deltas).map(|((r, v), d)| {
            vec![r.to_string(), num(self.lambda), num(*v), opt_num(*d)]
        });
        csv(&["radius", "lambda", "value", "delta"], rows)
    }
}

pub fn incompleteness_diagnostic(
    g: &LazyGraph,
    lambda: f64,
    radii: &[usize],
    tol: f64,
    opts: &ComputeOptions,
) -> Result<DiagnosticTrace> {
    if !(lambda < 0.0) {
        return Err(Error::Precondition(format!("λ must be negative, got {lambda}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    check_schedule(radii)?;
    let radial = opts.use_radial(g, true)?;
    let mut trace = DiagnosticTrace {
        lambda,
        tol,
        radii: Vec::new(),
        values: Vec::new(),
        deltas: Vec::new(),
        status: TraceStatus::NotConverged,
        stabilized_at: None,
        limit_estimate: None,
        evidence: NumericEvidence::None,
        radial,
        note: None,
    };
    let mut small_run = 0;
    let mut last_size = None;
    for &r in radii.iter().filter(|&&r| r > 0) {
        let step = if radial {
            RadialQuotient::of_graph(g, r)
                .ok_or(Error::NotAModelBall)?
                .and_then(|q| q.boundary_one(lambda))
                .map(|v| (v[0], None))
        } else {
            materialize_ball_at(g, &g.root(), r, opts.capacity).and_then(|ball| {
                let v = boundary_one_with(&ball, lambda, false, opts.dense_limit)?;
                Ok((v[0], Some(ball.len())))
            })
        };
        let (value, size) = match step {
            Ok(s) => s,
            Err(Error::EmptyBoundary) => {
                trace.status = TraceStatus::Exhausted;
                trace.note = Some("the graph is finite and has no boundary".into());
                break;
            }
            Err(e) if is_resource_limit(&e) => {
                trace.status = TraceStatus::Inconclusive;
                trace.note = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        if size.is_some() && size == last_size {
            trace.status = TraceStatus::Exhausted;
            trace.note = Some(format!("the ball stopped growing at radius {r}"));
            break;
        }
        last_size = size;
        let delta = trace.values.last().map(|prev| value - prev);
        trace.radii.push(r);
        trace.values.push(value);
        trace.deltas.push(delta);
        small_run = match delta {
            Some(d) if d.abs() < tol => small_run + 1,
            _ => 0,
        };
        if small_run >= STABLE_RUN {
            trace.status = TraceStatus::Converged;
            trace.stabilized_at = Some(r);
            break;
        }
    }
    trace.limit_estimate = trace.values.last().copied();
    trace.evidence = match (trace.status, trace.limit_estimate) {
        (TraceStatus::Exhausted, _) | (_, None) => NumericEvidence::None,
        (TraceStatus::Converged, Some(v)) if v >= POSITIVE_THRESHOLD => NumericEvidence::SupportsIncomplete,
        (_, Some(v)) if v < POSITIVE_THRESHOLD => NumericEvidence::SupportsComplete,
        _ => NumericEvidence::None,
    };
    Ok(trace)
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnoseOptions {
    pub lambda: f64,
    pub radii: Vec<usize>,
    pub tol: f64,
    pub compute: ComputeOptions,
    /// Run the numeric diagnostic even when a symbolic criterion has fired.
    pub always_numeric: bool,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self {
            lambda: -1.0,
            radii: (1..=60).collect(),
            tol: 1e-8,
            compute: ComputeOptions::default(),
            always_numeric: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosisReport {
    pub graph: String,
    pub verdict: Verdict,
    /// Which evidence decided the verdict.
    pub decided_by: Option<String>,
    pub criteria: Vec<CriterionResult>,
    pub lambda: f64,
    pub radii: Vec<usize>,
    pub diagnostic: Option<DiagnosticTrace>,
    pub notes: Vec<String>,
}

impl DiagnosisReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn summary(&self) -> String {
        let mut lines = vec![format!("graph: {}", self.graph), format!("verdict: {:?}", self.verdict)];
        for c in &self.criteria {
            let v = match (c.applicable, c.verdict) {
                (false, _) => "not applicable".to_string(),
                (true, Some(v)) => format!("{v:?}"),
                (true, None) => "no verdict".to_string(),
            };
            lines.push(format!("  {}: {v}", c.name));
        }
        if let Some(d) = &self.diagnostic {
            lines.push(format!(
                "  numeric v_r(root): {:?} after {} radii, estimate {}",
                d.evidence,
                d.radii.len(),
                d.limit_estimate.map_or("-".into(), num)
            ));
        }
        for n in &self.notes {
            lines.push(format!("  note: {n}"));
        }
        lines.join("\n")
    }
}

/// Directions tried by the directional criterion, at most this many.
const MAX_DIRECTIONS: usize = 64;

/// Symbolic criteria first; the numeric diagnostic only fills an
/// inconclusive verdict. Disagreeing symbolic criteria are an error.
pub fn diagnose(g: &LazyGraph, opts: &DiagnoseOptions) -> Result<DiagnosisReport> {
    let mut criteria = vec![model_tree_criterion(g), max_valence_criterion(g)];
    if g.is_tree() {
        let root = g.root();
        let mut best: Option<CriterionResult> = None;
        for x1 in g.neighbors(&root)?.into_iter().take(MAX_DIRECTIONS) {
            let c = min_valence_direction_criterion(g, &x1)?;
            if c.fired().is_some() {
                best = Some(c);
                break;
            }
            best.get_or_insert(c);
        }
        if let Some(c) = best {
            criteria.push(c);
        }
    }

    let mut verdict = Verdict::Inconclusive;
    let mut decided_by = None;
    for c in &criteria {
        if let Some(v) = c.fired() {
            if verdict != Verdict::Inconclusive && verdict != v {
                return Err(Error::ConflictingCriteria(format!(
                    "{} says {v:?} but {} says {verdict:?}",
                    c.name,
                    decided_by.as_deref().unwrap_or("?")
                )));
            }
            if decided_by.is_none() {
                verdict = v;
                decided_by = Some(c.name.clone());
            }
        }
    }

    let mut notes = Vec::new();
    let mut diagnostic = None;
    if verdict == Verdict::Inconclusive || opts.always_numeric {
        let d = incompleteness_diagnostic(g, opts.lambda, &opts.radii, opts.tol, &opts.compute)?;
        let numeric_verdict = (d.evidence == NumericEvidence::SupportsIncomplete).then_some(Verdict::Incomplete);
        if verdict == Verdict::Inconclusive {
            if let Some(v) = numeric_verdict {
                verdict = v;
                decided_by = Some("lambda_diagnostic".into());
                notes.push("verdict rests on the numeric diagnostic, a heuristic".into());
            }
        } else if numeric_verdict.is_some_and(|v| v != verdict)
            || (verdict == Verdict::Incomplete && d.evidence == NumericEvidence::SupportsComplete)
        {
            notes.push(format!("numeric evidence {:?} disagrees with the symbolic verdict", d.evidence));
        }
        criteria.push(CriterionResult {
            name: "lambda_diagnostic".into(),
            applicable: true,
            verdict: numeric_verdict,
            evidence: json!({
                "evidence": d.evidence,
                "status": d.status,
                "limit_estimate": d.limit_estimate,
                "stabilized_at": d.stabilized_at,
            }),
        });
        diagnostic = Some(d);
    }

    Ok(DiagnosisReport {
        graph: g.describe(),
        verdict,
        decided_by,
        criteria,
        lambda: opts.lambda,
        radii: opts.radii.clone(),
        diagnostic,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_model_tree, BranchingLaw, GraphSpec};

    fn preset(name: &str) -> LazyGraph {
        GraphSpec::preset(name).unwrap().build().unwrap()
    }

    #[test]
    fn binary_is_complete_by_two_criteria() {
        let rep = diagnose(&preset("binary"), &DiagnoseOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Complete);
        let fired: Vec<_> = rep.criteria.iter().filter(|c| c.fired().is_some()).map(|c| c.name.as_str()).collect();
        assert_eq!(fired, ["model_tree", "max_valence"]);
    }

    #[test]
    fn exponential_tree_is_incomplete() {
        let g = build_model_tree(BranchingLaw::exponential(2, 2, 1).unwrap());
        let rep = diagnose(&g, &DiagnoseOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Incomplete);
        let d = rep.diagnostic.unwrap();
        assert_eq!(d.evidence, NumericEvidence::SupportsIncomplete);
        assert!(rep.notes.is_empty());
    }

    #[test]
    fn undeclared_tail_is_inconclusive() {
        let g = build_model_tree(BranchingLaw::explicit(2, vec![2, 3, 5], None).unwrap());
        let rep = diagnose(&g, &DiagnoseOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        assert_eq!(rep.diagnostic.unwrap().status, TraceStatus::Inconclusive);
    }

    #[test]
    fn finite_graphs() {
        let closed = LazyGraph::explicit(&[(0, 1), (1, 2)], 0, &Default::default()).unwrap();
        let rep = diagnose(&closed, &DiagnoseOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Complete);
        assert_eq!(rep.diagnostic.unwrap().status, TraceStatus::Exhausted);
        let open = preset("p5");
        let rep = diagnose(&open, &DiagnoseOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        assert_eq!(rep.diagnostic.unwrap().status, TraceStatus::Exhausted);
    }
}
