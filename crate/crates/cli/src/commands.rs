//! Subcommand bodies. Each writes its files under the output directory and
//! prints a short summary on standard output.

use std::path::Path;

use heatgraph::compare::{compare_embedded, CompareMode};
use heatgraph::completeness::{diagnose as run_diagnosis, DiagnoseOptions, Verdict};
use heatgraph::graph::{materialize_ball_at, valence_profile, LawSpec};
use heatgraph::heat::{
    exhaustion_kernel, exhaustion_mass, exhaustion_step_violation, verify_kernel_properties, HeatKernel, TraceStatus,
};
use heatgraph::operators::{assemble_reduced_with_limit, bounded_laplacian_norm_check, green_residual};
use heatgraph::output::{csv, num};
use heatgraph::spectrum::{
    cheeger_samples, exterior_lambda0_trace, geometric_bounds, lambda0_ball, lambda0_exhaustion,
    positive_harmonic_witness, rayleigh_quotient,
};
use heatgraph::ComputeOptions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::args::{gnuplot_blocks, resolve_vertex, write, GraphSource};
use crate::{CliError, Status};

fn to_json(value: &impl Serialize) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Core(e.into()))
}

#[allow(clippy::too_many_arguments)]
pub fn heat(
    source: &GraphSource,
    times: &[f64],
    radii: &[usize],
    probe: &str,
    target: Option<&str>,
    tol: f64,
    opts: &ComputeOptions,
    out: &Path,
) -> Result<Status, CliError> {
    let (_, g) = source.load()?;
    let x = resolve_vertex(&g, probe)?;
    let y = resolve_vertex(&g, target.unwrap_or(probe))?;
    let mut traces = String::new();
    let mut mass_rows = Vec::new();
    let mut blocks = Vec::new();
    let mut status = Status::Ok;
    for &t in times {
        let trace = exhaustion_kernel(&g, &x, &y, t, radii, tol, opts)?;
        if trace.status == TraceStatus::Inconclusive {
            status = Status::Inconclusive;
        }
        let csv_text = trace.to_csv();
        if traces.is_empty() {
            traces = csv_text;
        } else {
            traces.extend(csv_text.lines().skip(1).map(|l| format!("{l}\n")));
        }
        for (r, m) in exhaustion_mass(&g, &x, t, &trace.radii, opts)? {
            mass_rows.push(vec![r.to_string(), num(t), x.to_string(), num(m)]);
        }
        blocks.push((
            format!("t = {t}, p_t({x}, {y}) by radius"),
            trace.radii.iter().map(|&r| r as f64).zip(trace.values.iter().copied()).collect(),
        ));
        println!(
            "t = {t}: {:?} after {} radii, p_t({x}, {y}) >= {}{}",
            trace.status,
            trace.radii.len(),
            trace.lower_bound.map_or("-".into(), num),
            trace.note.as_ref().map_or(String::new(), |n| format!(" ({n})")),
        );
    }
    write(out, "heat_trace.csv", &traces)?;
    write(out, "heat_trace.dat", &gnuplot_blocks(&blocks))?;
    write(out, "heat_mass.csv", &csv(&["radius", "t", "x", "mass"], mass_rows))?;
    Ok(status)
}

pub fn diagnose(
    source: &GraphSource,
    lambda: f64,
    radii: Vec<usize>,
    tol: f64,
    always_numeric: bool,
    opts: &ComputeOptions,
    out: &Path,
) -> Result<Status, CliError> {
    if !(lambda < 0.0) {
        return Err(CliError::Usage(format!("--lambda must be negative, got {lambda}")));
    }
    let (_, g) = source.load()?;
    let report = run_diagnosis(
        &g,
        &DiagnoseOptions {
            lambda,
            radii,
            tol,
            compute: *opts,
            always_numeric,
        },
    )?;
    write(out, "diagnosis.json", &report.to_json()?)?;
    if let Some(trace) = &report.diagnostic {
        write(out, "diagnostic.csv", &trace.to_csv())?;
        let points = trace.radii.iter().map(|&r| r as f64).zip(trace.values.iter().copied()).collect();
        write(out, "diagnostic.dat", &gnuplot_blocks(&[(format!("v_r(root), lambda = {lambda}"), points)]))?;
    }
    println!("{}", report.summary());
    Ok(match report.verdict {
        Verdict::Inconclusive => Status::Inconclusive,
        _ => Status::Ok,
    })
}

pub fn spectrum(
    source: &GraphSource,
    radii: &[usize],
    tol: f64,
    exterior: Option<(Vec<usize>, usize)>,
    witness_lambda: Option<f64>,
    opts: &ComputeOptions,
    out: &Path,
) -> Result<Status, CliError> {
    let (_, g) = source.load()?;
    let trace = lambda0_exhaustion(&g, radii, tol, opts)?;
    write(out, "spectrum.csv", &trace.to_csv())?;
    let points = trace.radii.iter().map(|&r| r as f64).zip(trace.values.iter().copied()).collect();
    write(out, "spectrum.dat", &gnuplot_blocks(&[("lambda0 by radius".into(), points)]))?;
    let mut report = json!({ "graph": g.describe(), "lambda0": trace });
    println!(
        "λ₀ estimate (upper bound) {} after {} radii, {:?}",
        trace.estimate.map_or("-".into(), num),
        trace.radii.len(),
        trace.status
    );
    if let Some(b) = trace.geometric {
        println!(
            "geometric: c = {}, m = {}, bound {}",
            num(b.c),
            num(b.m_min),
            b.bound_full.map_or("not applicable".into(), num)
        );
    }
    if let Some((inner, outer)) = exterior {
        let ext = exterior_lambda0_trace(&g, &inner, outer, opts)?;
        write(out, "exterior.csv", &ext.to_csv())?;
        println!("annulus λ₀ up to radius {outer}: {}", ext.values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" "));
        report["exterior"] = serde_json::to_value(&ext).map_err(|e| CliError::Core(e.into()))?;
    }
    if let Some(lambda) = witness_lambda {
        let w = positive_harmonic_witness(&g, lambda, radii, opts)?;
        write(out, "witness.csv", &w.to_csv())?;
        println!(
            "witness for λ = {lambda}: min u {}, max u / product bound {}",
            num(w.min_value),
            num(w.max_bound_ratio)
        );
        report["witness"] = serde_json::to_value(&w).map_err(|e| CliError::Core(e.into()))?;
    }
    write(out, "spectrum.json", &to_json(&report)?)?;
    Ok(match trace.status {
        TraceStatus::Inconclusive => Status::Inconclusive,
        _ => Status::Ok,
    })
}

pub fn compare(
    source: &GraphSource,
    mode: CompareMode,
    model: &str,
    radius: usize,
    times: &[f64],
    opts: &ComputeOptions,
    out: &Path,
) -> Result<Status, CliError> {
    let (_, g) = source.load()?;
    let law_spec: LawSpec = serde_json::from_str(model).map_err(|e| CliError::Spec {
        origin: "--model".into(),
        source: e.into(),
    })?;
    let root = g.root();
    let law = law_spec.to_law(Some(g.valence(&root)? as u64))?;
    let ball = materialize_ball_at(&g, &root, radius, opts.capacity)?;
    let report = compare_embedded(&ball, &law, times, mode)?;
    write(out, "compare.csv", &report.to_csv())?;
    write(out, "compare.json", &to_json(&report)?)?;
    println!(
        "{:?} against {} at radius {radius}: min margin {}",
        mode,
        report.law,
        num(report.min_margin)
    );
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct PropertyCheck {
    name: &'static str,
    max_violation: f64,
    tolerance: f64,
    pass: bool,
}

fn check(name: &'static str, max_violation: f64, tolerance: f64) -> PropertyCheck {
    PropertyCheck {
        name,
        max_violation,
        tolerance,
        pass: max_violation <= tolerance,
    }
}

pub fn verify(
    source: &GraphSource,
    radius: usize,
    samples: usize,
    seed: u64,
    opts: &ComputeOptions,
    out: &Path,
) -> Result<Status, CliError> {
    if radius == 0 {
        return Err(CliError::Usage("--radius must be at least 1".into()));
    }
    let (_, g) = source.load()?;
    let root = g.root();
    let ball = materialize_ball_at(&g, &root, radius, opts.capacity)?;
    let t_grid = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0];
    let k = HeatKernel::with_limit(&ball, opts.dense_limit)?;
    let kr = verify_kernel_properties(&k, &t_grid)?;
    let mut checks = vec![
        check("kernel_symmetry", kr.symmetry, 1e-9),
        check("kernel_boundary", kr.boundary, 1e-9),
        check("kernel_semigroup", kr.semigroup, 1e-9),
        check("kernel_positivity", (-kr.positivity_min).max(0.0), 1e-9),
        check("kernel_heat_equation", kr.heat_equation, 1e-9),
        check("kernel_range", kr.range, 1e-9),
        check("kernel_initial", kr.initial, 1e-12),
        check("kernel_time_derivative", kr.finite_difference, 1e-5),
        check("eigen_vs_series", kr.series_agreement, 1e-9),
    ];

    let mut step = f64::NEG_INFINITY;
    let mut prev = materialize_ball_at(&g, &root, 1, opts.capacity)?;
    for r in 2..=radius {
        let next = materialize_ball_at(&g, &root, r, opts.capacity)?;
        step = step.max(exhaustion_step_violation(&prev, &next, &[0.1, 1.0, 5.0])?);
        prev = next;
    }
    checks.push(check("exhaustion_monotonicity", step.max(0.0), 1e-12));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_interior = |rng: &mut ChaCha8Rng| {
        let mut f = vec![0.0; ball.len()];
        for &i in ball.interior() {
            f[i] = rng.random_range(-1.0..1.0);
        }
        f
    };
    let mut green: f64 = 0.0;
    for _ in 0..samples {
        let (f, h) = (random_interior(&mut rng), random_interior(&mut rng));
        let rep = green_residual(&ball, &f, &h)?;
        green = green.max(rep.residual / rep.scale);
    }
    checks.push(check("green_identity", green, 1e-12));
    checks.push(check("normalized_top_eigenvalue", (bounded_laplacian_norm_check(&ball)? - 2.0).max(0.0), 1e-10));
    checks.push(check(
        "valence_identity",
        if valence_profile(&ball).identity_holds() { 0.0 } else { 1.0 },
        0.0,
    ));

    let reduced = assemble_reduced_with_limit(&ball, opts.dense_limit)?;
    let (l0, _) = lambda0_ball(&reduced)?;
    let mut rayleigh = f64::NEG_INFINITY;
    for _ in 0..samples {
        rayleigh = rayleigh.max(l0 - rayleigh_quotient(&ball, &random_interior(&mut rng))?);
    }
    checks.push(check("rayleigh_above_lambda0", rayleigh.max(0.0), 1e-10));
    let radii: Vec<usize> = (1..=radius).collect();
    let trace = lambda0_exhaustion(&g, &radii, 1e-12, opts)?;
    checks.push(check("lambda0_monotone", trace.max_increase().max(0.0), 1e-12));
    let smallest = trace.values.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(check("lambda0_positive", if smallest > 0.0 { 0.0 } else { -smallest }, 0.0));
    let gb = geometric_bounds(&valence_profile(&ball))?;
    if gb.applicable() {
        let cheeger = cheeger_samples(&ball)?
            .iter()
            .map(|ch| gb.c * ch.area - ch.boundary_edges)
            .fold(0.0, f64::max);
        checks.push(check("cheeger_inequality", cheeger, 1e-9));
    }

    let all = checks.iter().all(|c| c.pass);
    for c in &checks {
        println!(
            "{:<26} {}  max violation {} (tolerance {})",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            num(c.max_violation),
            num(c.tolerance)
        );
    }
    let report = json!({
        "graph": g.describe(),
        "radius": radius,
        "samples": samples,
        "seed": seed,
        "pass": all,
        "properties": checks,
    });
    write(out, "verify.json", &to_json(&report)?)?;
    if all {
        Ok(Status::Ok)
    } else {
        Err(CliError::Failed("some properties failed; see verify.json".into()))
    }
}
