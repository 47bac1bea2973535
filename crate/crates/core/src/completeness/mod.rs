//! Stochastic completeness: symbolic criteria, radial λ-harmonic functions,
//! Dirichlet λ-problems and the numeric diagnostic built from them.

mod criteria;
mod diagnose;
mod dirichlet;
mod radial;

pub use criteria::{
    max_valence_criterion, max_valence_verdict, min_valence_direction_criterion, model_tree_criterion,
    model_tree_verdict, subharmonic_pushforward_check, CriterionResult, PushforwardReport, Verdict,
};
pub use diagnose::{
    diagnose, incompleteness_diagnostic, DiagnoseOptions, DiagnosisReport, DiagnosticTrace, NumericEvidence,
    POSITIVE_THRESHOLD, STABLE_RUN,
};
pub use dirichlet::{
    bounded_laplacian_growth_check, dirichlet_lambda_boundary_one, rooted_lambda_solution, GrowthReport,
};
pub(crate) use dirichlet::solve_dirichlet;
pub use radial::{product_bounds, radial_harmonic, radial_laplacian, sphere_average, ProductBounds, RadialFunction};
