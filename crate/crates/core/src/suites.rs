//! Verification suites shared by the command line and the test targets.
//! Each returns a serializable report with the measured constants and a verdict.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    coercivity_check, entropy_inequality_check, relative_entropy, stability_experiment, EntropyTruncation,
    Perturbation, RelativeEntropySetup,
};
use crate::error::{config, Error, Result};
use crate::geometry::{Geometry, GeometryDescriptor, Mesh, PartitionOfUnity, Side};
use crate::kinetics::{
    interface_rate_from_gradient_structure, log_uniform, rate_from_gradient_structure, validate_hypotheses,
    validate_rates, KineticModel,
};
use crate::renormalisation::{
    refinement_study, renormalised_residual_interface, renormalised_residual_outer, verify_projection_properties,
    weak_form_residual_interface, weak_form_residual_outer, Battery, PropertyReport, RefinementReport, RenormTest,
    Target,
};
use crate::scenarios::{builtin, BUILTIN_NAMES};
use crate::solver::{run, Scenario, ScenarioDescriptor, Trajectory};

/// Tolerance on sampled dissipation violations.
pub const HYPOTHESIS_TOL: f64 = 1e-12;
/// Relative tolerance between the two rate constructions.
pub const GRADIENT_TOL: f64 = 1e-10;
/// Refinement levels `(resolution, dt)` used by the convergence checks.
pub const REFINEMENT_LEVELS: [(usize, f64); 3] = [(8, 4e-3), (16, 1e-3), (32, 2.5e-4)];
/// Required decrease per refinement level.
pub const MIN_DECREASE: f64 = 1.5;

/// One line of a consolidated report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub details: serde_json::Value,
}

impl SuiteResult {
    fn of<T: Serialize>(name: &str, passed: bool, report: &T) -> SuiteResult {
        SuiteResult {
            name: name.into(),
            passed,
            details: serde_json::to_value(report).expect("reports serialize"),
        }
    }
}

fn builtin_models() -> Result<Vec<(String, KineticModel)>> {
    BUILTIN_NAMES
        .iter()
        .map(|n| Ok((n.to_string(), KineticModel::from_descriptor(&builtin(n)?.model)?)))
        .collect()
}

// ---------------------------------------------------------------- kinetics

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCheck {
    pub model: String,
    pub reaction_dissipation: f64,
    pub interface_dissipation: f64,
    pub mass_defect: f64,
    pub quasi_positivity: f64,
    /// Largest relative mismatch between mass-action rates and the gradient
    /// construction; absent for models without one.
    pub gradient_mismatch: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticsReport {
    pub samples: usize,
    pub models: Vec<ModelCheck>,
}

impl KineticsReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.models.iter().all(|m| {
            m.reaction_dissipation <= HYPOTHESIS_TOL
                && m.interface_dissipation <= HYPOTHESIS_TOL
                && m.quasi_positivity <= HYPOTHESIS_TOL
                && m.mass_defect == 0.0
        })
    }

    pub fn gradient_consistent(&self) -> bool {
        self.models.iter().all(|m| m.gradient_mismatch.is_some_and(|g| g <= GRADIENT_TOL))
    }
}

fn relative_mismatch(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if *y == 0.0 { (x - y).abs() } else { (x - y).abs() / y.abs() })
        .fold(0.0, f64::max)
}

/// Largest relative difference between the direct rates and those recovered
/// from the dissipation potentials on log-uniform samples in `[1e-3, 1e3]`.
pub fn gradient_mismatch(model: &KineticModel, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = model.n_species;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = log_uniform(&mut rng, n, 1e-3, 1e3);
        let m = log_uniform(&mut rng, n, 1e-3, 1e3);
        if model.has_reaction() {
            for (side, u) in [(Side::Plus, &p), (Side::Minus, &m)] {
                let g = rate_from_gradient_structure(model, side, u)?;
                worst = worst.max(relative_mismatch(&g, &model.reaction_rate(side, u)));
            }
        }
        let g = interface_rate_from_gradient_structure(model, &p, &m)?;
        worst = worst.max(relative_mismatch(&g, &model.transmission_rate(&p, &m)));
    }
    Ok(worst)
}

/// Structural hypotheses and, when the model has one, the gradient construction.
pub fn check_model(name: &str, model: &KineticModel, samples: usize, seed: u64) -> Result<ModelCheck> {
    let h = validate_hypotheses(model, samples, seed)?;
    let gradient = match gradient_mismatch(model, samples, seed.wrapping_add(1)) {
        Ok(g) => Some(g),
        Err(Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ModelCheck {
        model: name.into(),
        reaction_dissipation: h.reaction_dissipation,
        interface_dissipation: h.interface_dissipation,
        mass_defect: h.mass_defect,
        quasi_positivity: h.quasi_positivity,
        gradient_mismatch: gradient,
    })
}

/// [`check_model`] for every built-in model.
pub fn kinetics_suite(samples: usize, seed: u64) -> Result<KineticsReport> {
    let models = builtin_models()?
        .into_iter()
        .map(|(name, m)| check_model(&name, &m, samples, seed))
        .collect::<Result<_>>()?;
    Ok(KineticsReport { samples, models })
}

// ---------------------------------------------------------------- geometry

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateCheck {
    pub template: String,
    pub maps: usize,
    pub involution: f64,
    pub gamma_fixed: f64,
    pub det: f64,
    pub boundary: f64,
    pub pou_identity: f64,
    pub pou_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub templates: Vec<TemplateCheck>,
}

impl GeometryReport {
    pub fn passed(&self) -> bool {
        self.templates.iter().all(|t| {
            t.involution <= 1e-10 && t.gamma_fixed <= 1e-10 && t.det <= 1e-6 && t.pou_identity <= 1e-12
        })
    }
}

/// Reflection maps and partition of unity of the standard relative-entropy
/// setup on both templates.
pub fn geometry_suite(pou_samples: usize, seed: u64) -> Result<GeometryReport> {
    let templates = ["flat_symmetric", "triple_junction"]
        .iter()
        .map(|name| {
            let g = Geometry::build(&GeometryDescriptor::template(name))?;
            let mesh = Mesh::build(&g, 16)?;
            let setup = RelativeEntropySetup::standard(&g, &mesh, EntropyTruncation::default_for(1, 1.0))?;
            let mut check = TemplateCheck {
                template: name.to_string(),
                maps: setup.maps.len(),
                involution: 0.0,
                gamma_fixed: 0.0,
                det: 0.0,
                boundary: 0.0,
                pou_identity: 0.0,
                pou_samples,
            };
            for (k, map) in setup.maps.iter().enumerate() {
                let r = map.verify(2000, 1e-5, seed.wrapping_add(k as u64))?;
                check.involution = check.involution.max(r.involution);
                check.gamma_fixed = check.gamma_fixed.max(r.gamma_fixed);
                check.det = check.det.max(r.det);
                check.boundary = check.boundary.max(r.boundary);
            }
            check.pou_identity = pou_identity(&g, &setup.pou, pou_samples, seed)?;
            Ok(check)
        })
        .collect::<Result<_>>()?;
    Ok(GeometryReport { templates })
}

/// `max |phi_out + sum phi_b - 1|` at random points of the two compartments.
pub fn pou_identity(g: &Geometry, pou: &PartitionOfUnity, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo_p, hi_p) = g.plus.bbox();
    let (lo_m, hi_m) = g.minus.bbox();
    let lo = [lo_p[0].min(lo_m[0]), lo_p[1].min(lo_m[1])];
    let hi = [hi_p[0].max(hi_m[0]), hi_p[1].max(hi_m[1])];
    let mut worst: f64 = 0.0;
    let mut taken = 0;
    let mut attempts = 0;
    while taken < samples {
        attempts += 1;
        if attempts > 100 * samples {
            return Err(Error::Geometry("could not sample the compartments".into()));
        }
        let x = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
        if !(g.plus.contains(x) || g.minus.contains(x)) {
            continue;
        }
        taken += 1;
        let w = pou.eval(x);
        worst = worst.max((w.outer + w.anchors.iter().sum::<f64>() - 1.0).abs());
    }
    Ok(worst)
}

// ---------------------------------------------------------------- solver

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub resolution: usize,
    pub t_end: f64,
    pub steps: usize,
    pub mass_drift: f64,
    pub floored_fraction: f64,
}

impl ConservationReport {
    pub fn passed(&self) -> bool {
        self.mass_drift <= 1e-10 && self.floored_fraction <= 1e-8
    }
}

pub fn conservation_check(desc: &ScenarioDescriptor, resolution: usize, t_end: f64) -> Result<ConservationReport> {
    let mut d = desc.clone();
    d.mesh.resolution = resolution;
    d.solver.t_end = t_end;
    let traj = run(&Scenario::build(&d)?)?;
    Ok(ConservationReport {
        resolution,
        t_end,
        steps: traj.ledger.len() - 1,
        mass_drift: traj.mass_drift(),
        floored_fraction: traj.floored_mass() / traj.total_initial_mass(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyLevel {
    pub resolution: usize,
    pub dt: f64,
    /// `max(0, max_k defect_k)`.
    pub max_positive_defect: f64,
    /// `max_k |min(0, defect_k)|`, the slack left by the one-sided time quadrature.
    pub max_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyScenarioReport {
    pub scenario: String,
    pub levels: Vec<EntropyLevel>,
}

impl EntropyScenarioReport {
    /// The positive defect either vanishes to round-off at every level or
    /// decreases by [`MIN_DECREASE`] per level.
    pub fn passed(&self) -> bool {
        let floor = 1e-12;
        self.levels.iter().all(|l| l.max_positive_defect <= floor)
            || self.levels.windows(2).all(|w| w[0].max_positive_defect >= MIN_DECREASE * w[1].max_positive_defect)
    }
}

pub fn entropy_levels(name: &str, desc: &ScenarioDescriptor, levels: &[(usize, f64)], t_end: f64) -> Result<EntropyScenarioReport> {
    let levels = levels
        .par_iter()
        .map(|&(res, dt)| {
            let mut d = desc.clone();
            d.mesh.resolution = res;
            d.solver.dt_init = dt;
            d.solver.t_end = t_end;
            let check = entropy_inequality_check(&run(&Scenario::build(&d)?)?);
            let gap = check.rows.iter().map(|r| (-r.defect).max(0.0)).fold(0.0, f64::max);
            Ok(EntropyLevel { resolution: res, dt, max_positive_defect: check.max_defect, max_gap: gap })
        })
        .collect::<Result<_>>()?;
    Ok(EntropyScenarioReport { scenario: name.into(), levels })
}

/// Entropy inequality on all built-in scenarios over [`REFINEMENT_LEVELS`].
pub fn entropy_suite(t_end: f64) -> Result<Vec<EntropyScenarioReport>> {
    BUILTIN_NAMES.iter().map(|n| entropy_levels(n, &builtin(n)?, &REFINEMENT_LEVELS, t_end)).collect()
}

/// Largest cell difference over the common snapshot times.
pub fn trajectory_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.times.len() != b.times.len() || a.times.iter().zip(&b.times).any(|(s, t)| (s - t).abs() > 1e-12) {
        return Err(Error::Precondition("trajectories stored different output times".into()));
    }
    Ok(a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(u, v)| u.values.iter().zip(&v.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub epsilons: Vec<f64>,
    /// Distance between the runs at `eps` and `eps / 2`.
    pub distances: Vec<f64>,
}

impl EpsilonReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }
}

pub fn epsilon_consistency(desc: &ScenarioDescriptor, epsilons: &[f64]) -> Result<EpsilonReport> {
    let mut all: Vec<f64> = epsilons.iter().flat_map(|e| [*e, 0.5 * e]).collect();
    all.sort_by(|a, b| b.total_cmp(a));
    all.dedup();
    let runs: Vec<(f64, Trajectory)> = all
        .par_iter()
        .map(|&e| {
            let mut d = desc.clone();
            d.solver.epsilon = e;
            Ok((e, run(&Scenario::build(&d)?)?))
        })
        .collect::<Result<_>>()?;
    let find = |e: f64| runs.iter().find(|(x, _)| *x == e).map(|(_, t)| t).expect("every epsilon was run");
    let distances = epsilons.iter().map(|&e| trajectory_distance(find(e), find(0.5 * e))).collect::<Result<_>>()?;
    Ok(EpsilonReport { epsilons: epsilons.to_vec(), distances })
}

// ---------------------------------------------------------------- truncations

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub projection: PropertyReport,
    pub exponents: Vec<f64>,
    /// Sampled `sup |u|_1 |D xi*|` for each exponent.
    pub decay: Vec<f64>,
    pub decay_ratios: Vec<f64>,
}

impl TruncationReport {
    pub fn decay_halves(&self) -> bool {
        self.decay_ratios.iter().all(|r| *r >= 1.0 && *r <= 4.0)
    }

    pub fn passed(&self) -> bool {
        self.projection.passed() && self.decay_halves()
    }
}

pub fn truncation_suite(n_species: usize, budget: usize, seed: u64) -> Result<TruncationReport> {
    let projection = verify_projection_properties(2 * n_species, &[4.0, 16.0, 64.0], budget, seed)?;
    let exponents = vec![2.0, 4.0, 8.0];
    let decay = exponents
        .iter()
        .map(|&n| Ok(EntropyTruncation::new(16.0, n)?.measured_decay(2 * n_species, 4000)))
        .collect::<Result<Vec<f64>>>()?;
    let decay_ratios = decay.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(TruncationReport { projection, exponents, decay, decay_ratios })
}

// ---------------------------------------------------------------- relative entropy

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub perturbations: usize,
    pub e: f64,
    pub n: f64,
    pub min_h_rel: f64,
    /// Smallest `H_rel / sum |sqrt u - sqrt U|^2` over the perturbations.
    pub min_ratio: f64,
    pub identity_h_rel: f64,
    /// Perturbations that reached the truncated classes.
    pub truncated_cases: usize,
}

impl CoercivityReport {
    pub fn passed(&self) -> bool {
        self.min_h_rel >= 0.0 && self.min_ratio > 0.0 && self.identity_h_rel.abs() <= 1e-12
    }
}

/// Random multiplicative perturbations of the initial state of `desc`, some with
/// localized spikes large enough to trigger the truncation.
pub fn coercivity_suite(desc: &ScenarioDescriptor, perturbations: usize, seed: u64) -> Result<CoercivityReport> {
    let sc = Scenario::build(desc)?;
    let reference = sc.initial_state()?;
    let trunc = EntropyTruncation::default_for(sc.n_species(), reference.max());
    let setup = RelativeEntropySetup::standard(&sc.geometry, &sc.mesh, trunc)?;
    let identity = relative_entropy(&sc.mesh, &sc.model, &setup, &reference, &reference)?.h_rel;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = CoercivityReport {
        perturbations,
        e: trunc.e,
        n: trunc.n,
        min_h_rel: f64::INFINITY,
        min_ratio: f64::INFINITY,
        identity_h_rel: identity,
        truncated_cases: 0,
    };
    for k in 0..perturbations {
        let amp = (rng.random_range((1e-3f64).ln()..(3f64).ln())).exp();
        let mut u = reference.clone();
        for v in u.values.iter_mut() {
            *v *= (amp * rng.random_range(-1.0..1.0)).exp();
        }
        if k % 4 == 3 {
            // spike near the interface so that reflected partners see it
            let centre = sc.mesh.cells[sc.mesh.interface_faces[rng.random_range(0..sc.mesh.interface_faces.len())].plus].center;
            let height = trunc.e * (trunc.e.ln() * rng.random_range(0.2..1.5)).exp();
            for (c, cell) in sc.mesh.cells.iter().enumerate() {
                if crate::geometry::polygon::dist(cell.center, centre) < 0.1 {
                    for v in u.cell_mut(c) {
                        *v = height;
                    }
                }
            }
        }
        let rel = relative_entropy(&sc.mesh, &sc.model, &setup, &u, &reference)?;
        if rel.fractions[0] < 1.0 {
            rep.truncated_cases += 1;
        }
        let c = coercivity_check(&sc.mesh, &rel, &trunc, &u, &reference);
        rep.min_h_rel = rep.min_h_rel.min(c.h_rel);
        if let Some(r) = c.ratio_sqrt {
            rep.min_ratio = rep.min_ratio.min(r);
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------- stability

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySuiteReport {
    pub zero_max_h_rel: f64,
    pub amplitudes: [f64; 2],
    pub h_rel_0: [f64; 2],
    pub fitted_c: [f64; 2],
    /// Largest `H_rel(t) / (exp(C t) H_rel(0))` over both perturbed runs.
    pub envelope_ratio: f64,
    /// `|C_1 - C_2| / max(|C_1|, |C_2|)`.
    pub c_spread: f64,
}

impl StabilitySuiteReport {
    pub fn passed(&self) -> bool {
        self.zero_max_h_rel <= 1e-10 && self.envelope_ratio <= 1.0 + 1e-9 && self.c_spread <= 0.2
    }
}

pub fn stability_suite(desc: &ScenarioDescriptor, amplitude: f64) -> Result<StabilitySuiteReport> {
    let zero = stability_experiment(desc, Perturbation { amplitude: 0.0 }, None)?;
    let amps = [amplitude, 0.5 * amplitude];
    let runs = amps
        .par_iter()
        .map(|a| stability_experiment(desc, Perturbation { amplitude: *a }, None))
        .collect::<Result<Vec<_>>>()?;
    let mut envelope: f64 = 0.0;
    for r in &runs {
        for row in &r.rows {
            let bound = (r.fitted_c * row.t).exp() * r.h_rel_0;
            if bound > 0.0 {
                envelope = envelope.max(row.h_rel / bound);
            }
        }
    }
    let (c1, c2) = (runs[0].fitted_c, runs[1].fitted_c);
    let scale = c1.abs().max(c2.abs());
    Ok(StabilitySuiteReport {
        zero_max_h_rel: zero.rows.iter().map(|r| r.h_rel.abs()).fold(0.0, f64::max),
        amplitudes: amps,
        h_rel_0: [runs[0].h_rel_0, runs[1].h_rel_0],
        fitted_c: [c1, c2],
        envelope_ratio: envelope,
        c_spread: if scale > 0.0 { (c1 - c2).abs() / scale } else { 0.0 },
    })
}

// ---------------------------------------------------------------- residuals

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSuiteReport {
    pub refinement: RefinementReport,
    pub decrease_factors: Vec<(f64, f64)>,
    /// Largest `|renormalised - weak form|` with truncation levels far above the densities.
    pub weak_form_mismatch: f64,
    pub weak_form_checks: usize,
}

impl ResidualSuiteReport {
    pub fn decreasing(&self) -> bool {
        !self.decrease_factors.is_empty()
            && self.decrease_factors.iter().all(|(o, i)| *o >= MIN_DECREASE && *i >= MIN_DECREASE)
    }

    pub fn passed(&self) -> bool {
        self.decreasing() && self.weak_form_mismatch <= 1e-12
    }
}

/// Compares the renormalised residuals of sums of projections at a level far
/// above the densities with the plain weak-form residual of the same linear test.
pub fn weak_form_agreement(traj: &Trajectory, sc: &Scenario, battery: &Battery, seed: u64) -> Result<(f64, usize)> {
    let n = sc.n_species();
    let level = 1e3 * traj.snapshots.iter().map(|s| s.max()).fold(1.0, f64::max);
    let maps = battery.maps(&sc.geometry)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = Vec::new();
    let mut worst: f64 = 0.0;
    for it in &battery.items {
        let key = (format!("{:?}", it.target), it.psi.center.map(f64::to_bits), it.psi.radius.to_bits());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let dim = match it.target {
            Target::Outer { .. } => n,
            Target::Interface { .. } => 2 * n,
        };
        let coeffs: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let parts = (0..dim)
            .map(|j| Ok((coeffs[j], RenormTest::projection(level, dim, j)?)))
            .collect::<Result<Vec<_>>>()?;
        let test = RenormTest::Combination(parts);
        let (r, w) = match it.target {
            Target::Outer { side } => (
                renormalised_residual_outer(traj, sc, &test, &it.psi, side)?,
                weak_form_residual_outer(traj, sc, &coeffs, &it.psi, side)?,
            ),
            Target::Interface { anchor } => (
                renormalised_residual_interface(traj, sc, &test, &maps[anchor], &it.psi)?,
                weak_form_residual_interface(traj, sc, &coeffs, &maps[anchor], &it.psi)?,
            ),
        };
        worst = worst.max((r - w).abs());
    }
    Ok((worst, seen.len()))
}

pub fn residual_suite(desc: &ScenarioDescriptor, t_end: f64, seed: u64) -> Result<ResidualSuiteReport> {
    let refinement = refinement_study(desc, &REFINEMENT_LEVELS, t_end)?;
    let mut d = desc.clone();
    let (res, dt) = REFINEMENT_LEVELS[1];
    d.mesh.resolution = res;
    d.solver.dt_init = dt;
    d.solver.t_end = t_end;
    d.solver.output_every = 0.0;
    let sc = Scenario::build(&d)?;
    let traj = run(&sc)?;
    let battery = Battery::default_for(&sc.geometry, sc.n_species())?;
    let (weak_form_mismatch, weak_form_checks) = weak_form_agreement(&traj, &sc, &battery, seed)?;
    Ok(ResidualSuiteReport {
        decrease_factors: refinement.decrease_factors(),
        refinement,
        weak_form_mismatch,
        weak_form_checks,
    })
}

// ---------------------------------------------------------------- negative controls

/// Deliberately broken inputs and whether each was caught.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlReport {
    pub raised: Vec<String>,
    pub details: serde_json::Value,
}

pub const EXPECTED_CONTROL_FLAGS: [&str; 4] = ["reaction_dissipation", "negative_dissipation", "residual_jump", "coverage_gap"];

impl ControlReport {
    pub fn exactly_expected(&self) -> bool {
        let mut got = self.raised.clone();
        got.sort();
        let mut want: Vec<String> = EXPECTED_CONTROL_FLAGS.iter().map(|s| s.to_string()).collect();
        want.sort();
        got == want
    }
}

/// Multiplies the final snapshot by 1.1 and returns the ratio of the largest
/// battery residuals after and before.
pub fn corruption_ratio(traj: &Trajectory, sc: &Scenario, battery: &Battery) -> Result<f64> {
    let base = battery.evaluate(traj, sc)?.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let mut bad = traj.clone();
    let last = bad.snapshots.len() - 1;
    for v in bad.snapshots[last].values.iter_mut() {
        *v *= 1.1;
    }
    let broken = battery.evaluate(&bad, sc)?.iter().map(|r| r.abs()).fold(0.0, f64::max);
    Ok(broken / base)
}

/// Runs the negative controls; a flag is raised when the corresponding check detects the fault.
pub fn negative_controls(seed: u64) -> Result<ControlReport> {
    let mut raised = Vec::new();
    let mut details = serde_json::Map::new();

    let poly = KineticModel::from_descriptor(&builtin("flat_polynomial")?.model)?;
    let flipped = |s: Side, u: &[f64]| poly.reaction_rate(s, u).into_iter().map(|x| -x).collect();
    let tr = |p: &[f64], q: &[f64]| {
        let r = poly.transmission_rate(p, q);
        let neg = r.iter().map(|x| -x).collect();
        (r, neg)
    };
    let h = validate_rates(2, &flipped, &tr, [&poly.u_ref[0], &poly.u_ref[1]], 1000, seed)?;
    details.insert("flipped_reaction_violation".into(), h.reaction_dissipation.into());
    if h.reaction_dissipation > HYPOTHESIS_TOL {
        raised.push("reaction_dissipation".to_string());
    }

    // log growth has no entropy structure: its ledger must show negative dissipation
    let mut d = builtin("flat_polynomial")?;
    d.model.bulk_variant = Some("log_growth".into());
    d.solver.t_end = 0.25;
    let traj = run(&Scenario::build(&d)?)?;
    let min_d = traj.ledger.iter().map(|r| r.d_bulk_total() + r.d_int).fold(f64::INFINITY, f64::min);
    let growth = traj.ledger.windows(2).map(|w| w[1].entropy - w[0].entropy).fold(f64::NEG_INFINITY, f64::max);
    details.insert("log_growth_min_dissipation".into(), min_d.into());
    details.insert("log_growth_max_entropy_increase".into(), growth.into());
    if min_d < 0.0 {
        raised.push("negative_dissipation".to_string());
    }

    let mut d = builtin("flat_linear")?;
    d.mesh.resolution = 16;
    d.solver.dt_init = 1e-3;
    d.solver.t_end = 0.1;
    d.solver.output_every = 0.0;
    let sc = Scenario::build(&d)?;
    let traj = run(&sc)?;
    let ratio = corruption_ratio(&traj, &sc, &Battery::default_for(&sc.geometry, sc.n_species())?)?;
    details.insert("corruption_ratio".into(), ratio.into());
    if ratio > 10.0 {
        raised.push("residual_jump".to_string());
    }

    let g = Geometry::flat_symmetric();
    match PartitionOfUnity::new(&g, vec![[0.0, 0.5]], vec![0.2]) {
        Err(Error::Coverage { uncovered }) => {
            details.insert("uncovered_samples".into(), uncovered.len().into());
            raised.push("coverage_gap".to_string());
        }
        Err(e) => return Err(e),
        Ok(_) => {}
    }
    Ok(ControlReport { raised, details: details.into() })
}

// ---------------------------------------------------------------- consolidated

pub const SUITE_NAMES: [&str; 5] = ["geometry", "kinetics", "truncations", "residuals", "controls"];

/// Runs the named suites; an empty selection is a configuration error.
pub fn verify_all(suites: &[String], seed: u64) -> Result<Vec<SuiteResult>> {
    if suites.is_empty() {
        return config("nothing to verify");
    }
    for s in suites {
        if !SUITE_NAMES.contains(&s.as_str()) {
            return config(format!("unknown suite `{s}`; known: {}", SUITE_NAMES.join(", ")));
        }
    }
    suites
        .iter()
        .map(|s| match s.as_str() {
            "geometry" => {
                let r = geometry_suite(10_000, seed)?;
                Ok(SuiteResult::of(s, r.passed(), &r))
            }
            "kinetics" => {
                let r = kinetics_suite(10_000, seed)?;
                Ok(SuiteResult::of(s, r.hypotheses_hold() && r.gradient_consistent(), &r))
            }
            "truncations" => {
                let r = truncation_suite(2, 2000, seed)?;
                Ok(SuiteResult::of(s, r.passed(), &r))
            }
            "residuals" => {
                let r = residual_suite(&builtin("flat_linear")?, 0.1, seed)?;
                Ok(SuiteResult::of(s, r.passed(), &r))
            }
            "controls" => {
                let r = negative_controls(seed)?;
                Ok(SuiteResult::of(s, r.exactly_expected(), &r))
            }
            _ => unreachable!("names checked above"),
        })
        .collect()
}
