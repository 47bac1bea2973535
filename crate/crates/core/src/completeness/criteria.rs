//! Symbolic completeness criteria.

use serde::Serialize;
use serde_json::json;

use crate::completeness::radial::radial_harmonic;
use crate::error::{Error, Result};
use crate::graph::{valence_profile, Ball, BranchingLaw, LazyGraph, SumClass, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Complete,
    Incomplete,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub name: String,
    pub applicable: bool,
    /// `Complete` or `Incomplete` when the criterion fires.
    pub verdict: Option<Verdict>,
    pub evidence: serde_json::Value,
}

impl CriterionResult {
    pub fn fired(&self) -> Option<Verdict> {
        self.verdict.filter(|v| *v != Verdict::Inconclusive)
    }
}

/// A model tree is complete exactly when `sum 1/n(r)` diverges.
pub fn model_tree_verdict(law: &BranchingLaw) -> Verdict {
    match law.sum_class() {
        SumClass::Divergent => Verdict::Complete,
        SumClass::Convergent => Verdict::Incomplete,
        SumClass::Unknown => Verdict::Inconclusive,
    }
}

pub fn model_tree_criterion(g: &LazyGraph) -> CriterionResult {
    let name = "model_tree".to_string();
    match g.model_law() {
        Some(law) => CriterionResult {
            name,
            applicable: true,
            verdict: Some(model_tree_verdict(law)),
            evidence: json!({
                "law": law.to_string(),
                "reciprocal_sum": law.sum_class(),
                "partial_sum_to_20": law.partial_reciprocal_sum(20).ok(),
            }),
        },
        None => CriterionResult {
            name,
            applicable: false,
            verdict: None,
            evidence: json!({ "reason": "not a model tree" }),
        },
    }
}

/// Divergence of `sum 1/M(r)`, `M(r)` the largest valence on sphere `r`,
/// implies completeness. The converse is not asserted.
pub fn max_valence_verdict(class: SumClass) -> Option<Verdict> {
    (class == SumClass::Divergent).then_some(Verdict::Complete)
}

pub fn max_valence_criterion(g: &LazyGraph) -> CriterionResult {
    let class = g.max_valence_class();
    let verdict = max_valence_verdict(class);
    CriterionResult {
        name: "max_valence".into(),
        applicable: verdict.is_some(),
        verdict,
        evidence: json!({ "max_valence_reciprocal_sum": class }),
    }
}

/// Convergence of `sum 1/underline_m(r)` along the subtree beyond `x1`
/// implies incompleteness of a tree.
pub fn min_valence_direction_criterion(g: &LazyGraph, x1: &VertexId) -> Result<CriterionResult> {
    let class = g.direction_min_class(x1)?;
    let verdict = (class == SumClass::Convergent).then_some(Verdict::Incomplete);
    Ok(CriterionResult {
        name: "min_valence_direction".into(),
        applicable: verdict.is_some(),
        verdict,
        evidence: json!({ "direction": x1, "min_valence_reciprocal_sum": class }),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PushforwardReport {
    pub lambda: f64,
    /// `max_x Δu(x) - λu(x)` over interior vertices, relative to `m(x) u(x)`.
    pub max_excess: f64,
    /// Interior vertices where `Δu < λu` strictly (beyond rounding).
    pub strict: usize,
    pub checked: usize,
}

/// Check that `u(x) = v(r(x))`, with `v` the radial λ-harmonic function of
/// `law`, is λ-subharmonic on a root-centered tree ball whose valences
/// dominate the law: `n(0) <= m(x0)` and `n(r) <= underline_m(r) - 1`.
pub fn subharmonic_pushforward_check(ball: &Ball, law: &BranchingLaw, lambda: f64) -> Result<PushforwardReport> {
    if !ball.is_tree() {
        return Err(Error::NotATree);
    }
    if !ball.centered_at_root() {
        return Err(Error::Precondition("ball must be centered at the root".into()));
    }
    let profile = valence_profile(ball);
    if law.n_f64(0)? > ball.valence(0) as f64 {
        return Err(Error::Precondition(format!(
            "n(0) = {} exceeds m(x0) = {}",
            law.root_valence(),
            ball.valence(0)
        )));
    }
    for r in 1..ball.radius() {
        let n = law.n_f64(r as u64)?;
        if n > profile.min[r] as f64 - 1.0 {
            return Err(Error::Precondition(format!(
                "n({r}) = {n} exceeds underline_m({r}) - 1 = {}",
                profile.min[r] as f64 - 1.0
            )));
        }
    }
    let v = radial_harmonic(law, lambda, 1.0, ball.radius())?.values;
    let u: Vec<f64> = (0..ball.len()).map(|i| v[ball.distance(i)]).collect();
    let mut rep = PushforwardReport {
        lambda,
        max_excess: f64::NEG_INFINITY,
        strict: 0,
        checked: 0,
    };
    for &x in ball.interior() {
        let lap = ball.valence(x) as f64 * u[x] - ball.neighbors(x).iter().map(|&y| u[y]).sum::<f64>();
        let scale = ball.valence(x) as f64 * u[x];
        let excess = (lap - lambda * u[x]) / scale;
        rep.max_excess = rep.max_excess.max(excess);
        if excess < -1e-12 {
            rep.strict += 1;
        }
        rep.checked += 1;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_model_tree, graft_ray, materialize_ball};

    #[test]
    fn model_verdicts() {
        let c = |law: BranchingLaw| model_tree_verdict(&law);
        assert_eq!(c(BranchingLaw::constant(2, 2).unwrap()), Verdict::Complete);
        assert_eq!(c(BranchingLaw::exponential(2, 2, 1).unwrap()), Verdict::Incomplete);
        assert_eq!(c(BranchingLaw::affine(1, 1, 1).unwrap()), Verdict::Complete);
        assert_eq!(c(BranchingLaw::explicit(2, vec![2, 3], None).unwrap()), Verdict::Inconclusive);
    }

    #[test]
    fn max_valence_examples() {
        assert_eq!(max_valence_verdict(SumClass::Divergent), Some(Verdict::Complete));
        assert_eq!(max_valence_verdict(SumClass::Convergent), None);
        let linear = build_model_tree(BranchingLaw::affine(1, 3, 5).unwrap());
        assert_eq!(max_valence_criterion(&linear).verdict, Some(Verdict::Complete));
    }

    #[test]
    fn grafted_directions() {
        let law = BranchingLaw::exponential(2, 2, 1).unwrap();
        let g = graft_ray(build_model_tree(law), &VertexId::root_path()).unwrap();
        let into_tree = min_valence_direction_criterion(&g, &VertexId::path(&[0])).unwrap();
        assert_eq!(into_tree.verdict, Some(Verdict::Incomplete));
        let along_ray = min_valence_direction_criterion(&g, &VertexId::Ray { level: 1, step: 1 }).unwrap();
        assert!(!along_ray.applicable);
        let cyc = LazyGraph::explicit(&[(0, 1), (1, 2), (2, 0)], 0, &Default::default()).unwrap();
        assert!(matches!(
            min_valence_direction_criterion(&cyc, &VertexId::Index(1)),
            Err(Error::NotATree)
        ));
    }

    #[test]
    fn pushforward_identity_and_fattened() {
        let law = BranchingLaw::constant(3, 2).unwrap();
        let ball = materialize_ball(&build_model_tree(law.clone()), 5).unwrap();
        let rep = subharmonic_pushforward_check(&ball, &law, -1.0).unwrap();
        assert!(rep.max_excess.abs() <= 1e-10);
        assert_eq!(rep.strict, 0);

        let fat = build_model_tree(law.clone())
            .with_extra_children(&VertexId::path(&[0]), 1)
            .unwrap();
        let ball = materialize_ball(&fat, 5).unwrap();
        let rep = subharmonic_pushforward_check(&ball, &law, -1.0).unwrap();
        assert!(rep.max_excess <= 1e-10);
        assert_eq!(rep.strict, 1);

        let thin = BranchingLaw::constant(3, 3).unwrap();
        assert!(matches!(
            subharmonic_pushforward_check(&ball, &thin, -1.0),
            Err(Error::Precondition(_))
        ));
        let big_root = BranchingLaw::constant(4, 2).unwrap();
        assert!(subharmonic_pushforward_check(&ball, &big_root, -1.0).is_err());
    }
}
