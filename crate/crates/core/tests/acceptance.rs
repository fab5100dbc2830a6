//! Acceptance checks. Each test prints one `criterion NN: PASS|FAIL` line with
//! the measured values, straight to stdout so it survives output capture.

use std::io::Write;
use std::time::{Duration, Instant};

use bulkflux::scenarios::builtin;
use bulkflux::suites::*;

const SEED: u64 = 20_240_611;

fn report(n: u32, title: &str, ok: bool, elapsed: Duration, limit: Duration, detail: String) {
    let timely = elapsed <= limit;
    let line = format!(
        "criterion {n:02}: {} | {title} | {:.2}s of {}s | {detail}\n",
        if ok && timely { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(ok, "{line}");
    assert!(timely, "over the time budget: {line}");
}

#[test]
fn criterion_01_structural_hypotheses() {
    let t = Instant::now();
    let r = kinetics_suite(10_000, SEED).unwrap();
    let worst = r
        .models
        .iter()
        .map(|m| m.reaction_dissipation.max(m.interface_dissipation).max(m.quasi_positivity))
        .fold(0.0, f64::max);
    let mass = r.models.iter().map(|m| m.mass_defect).fold(0.0, f64::max);
    report(
        1,
        "dissipation and mass balance of every built-in model",
        r.hypotheses_hold(),
        t.elapsed(),
        Duration::from_secs(5),
        format!("{} models x {} samples, worst violation {worst:e}, mass defect {mass:e}", r.models.len(), r.samples),
    );
}

#[test]
fn criterion_02_gradient_structure() {
    let t = Instant::now();
    let r = kinetics_suite(10_000, SEED).unwrap();
    let worst = r.models.iter().filter_map(|m| m.gradient_mismatch).fold(0.0, f64::max);
    report(
        2,
        "rates from dissipation potentials match mass action",
        r.gradient_consistent(),
        t.elapsed(),
        Duration::from_secs(5),
        format!("largest relative mismatch {worst:e} (tolerance {GRADIENT_TOL:e})"),
    );
}

#[test]
fn criterion_03_reflection_and_partition() {
    let t = Instant::now();
    let r = geometry_suite(10_000, SEED).unwrap();
    let detail = r
        .templates
        .iter()
        .map(|c| {
            format!(
                "{}: {} maps, involution {:e}, fixed {:e}, det {:e}, pou {:e}",
                c.template, c.maps, c.involution, c.gamma_fixed, c.det, c.pou_identity
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    report(3, "reflection maps and partition of unity", r.passed(), t.elapsed(), Duration::from_secs(10), detail);
}

#[test]
fn criterion_04_conservation_and_positivity() {
    let t = Instant::now();
    let r = conservation_check(&builtin("flat_linear").unwrap(), 32, 1.0).unwrap();
    report(
        4,
        "mass conservation and positivity on flat_linear",
        r.passed(),
        t.elapsed(),
        Duration::from_secs(60),
        format!("{} steps, drift {:e}, floored fraction {:e}", r.steps, r.mass_drift, r.floored_fraction),
    );
}

#[test]
fn criterion_05_entropy_dissipation() {
    let t = Instant::now();
    let all = entropy_suite(0.25).unwrap();
    let ok = all.iter().all(|s| s.passed());
    let detail = all
        .iter()
        .map(|s| {
            let pos: Vec<String> = s.levels.iter().map(|l| format!("{:.1e}", l.max_positive_defect)).collect();
            let gap: Vec<String> = s.levels.iter().map(|l| format!("{:.2e}", l.max_gap)).collect();
            format!("{}: positive defect [{}], gap [{}]", s.scenario, pos.join(", "), gap.join(", "))
        })
        .collect::<Vec<_>>()
        .join("; ");
    report(5, "discrete entropy inequality under refinement", ok, t.elapsed(), Duration::from_secs(600), detail);
}

#[test]
fn criterion_06_epsilon_consistency() {
    let t = Instant::now();
    let r = epsilon_consistency(&builtin("flat_polynomial").unwrap(), &[1.0, 0.5, 0.25, 0.125]).unwrap();
    report(
        6,
        "regularized runs converge as epsilon halves",
        r.strictly_decreasing(),
        t.elapsed(),
        Duration::from_secs(300),
        format!("distances {:?}", r.distances),
    );
}

#[test]
fn criterion_07_truncation_properties() {
    let t = Instant::now();
    let r = truncation_suite(2, 4000, SEED).unwrap();
    let p = &r.projection;
    report(
        7,
        "truncation families",
        r.passed(),
        t.elapsed(),
        Duration::from_secs(30),
        format!(
            "identities {:e}/{:e}, outside support {:e}, growth {:.3}/{:.3}, limits monotone {}/{}, decay ratios {:?}",
            p.identity_below_level,
            p.identity_below_image,
            p.gradient_outside_support,
            p.weighted_hessian_growth,
            p.gradient_growth,
            p.gradient_limit_monotone,
            p.hessian_limit_monotone,
            r.decay_ratios
        ),
    );
}

#[test]
fn criterion_08_relative_entropy_coercivity() {
    let t = Instant::now();
    let r = coercivity_suite(&builtin("flat_linear").unwrap(), 200, SEED).unwrap();
    report(
        8,
        "relative entropy is nonnegative and coercive",
        r.passed(),
        t.elapsed(),
        Duration::from_secs(120),
        format!(
            "E {:.3}, N {}, min H_rel {:e}, min ratio {:.4}, identity {:e}, truncated cases {}",
            r.e, r.n, r.min_h_rel, r.min_ratio, r.identity_h_rel, r.truncated_cases
        ),
    );
}

#[test]
fn criterion_09_weak_strong_stability() {
    let t = Instant::now();
    let r = stability_suite(&builtin("flat_linear").unwrap(), 1e-3).unwrap();
    report(
        9,
        "relative entropy between perturbed and reference runs",
        r.passed(),
        t.elapsed(),
        Duration::from_secs(300),
        format!(
            "zero-perturbation max {:e}, C {:?}, spread {:.2e}, envelope {:.6}",
            r.zero_max_h_rel, r.fitted_c, r.c_spread, r.envelope_ratio
        ),
    );
}

#[test]
fn criterion_10_renormalised_residuals() {
    let t = Instant::now();
    let r = residual_suite(&builtin("flat_linear").unwrap(), 0.1, SEED).unwrap();
    let maxima: Vec<String> =
        r.refinement.levels.iter().map(|l| format!("({:.2e}, {:.2e})", l.max_outer, l.max_interface)).collect();
    report(
        10,
        "renormalised residuals under refinement",
        r.passed(),
        t.elapsed(),
        Duration::from_secs(600),
        format!(
            "{} tests, maxima (outer, interface) [{}], factors {:?}, weak-form mismatch {:e} over {} checks",
            r.refinement.entries.len(),
            maxima.join(", "),
            r.decrease_factors,
            r.weak_form_mismatch,
            r.weak_form_checks
        ),
    );
}
