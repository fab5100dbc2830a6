use std::io::Write;

use serde::{Deserialize, Serialize};

use super::relative::{relative_entropy, RelativeEntropySetup};
use super::truncation::EntropyTruncation;
use crate::error::{Error, Result};
use crate::field::StateField;
use crate::geometry::Mesh;
use crate::solver::{run, run_from, Scenario, ScenarioDescriptor, Trajectory};

/// Smallest reference density accepted as a strong solution.
pub const REFERENCE_FLOOR: f64 = 1e-8;

/// Positivity and regularity bounds of the reference trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongSolutionProfile {
    pub iota: f64,
    pub max_density: f64,
    /// Largest face difference quotient over all snapshots.
    pub lipschitz_bound: f64,
    pub t_end: f64,
}

impl StrongSolutionProfile {
    pub fn of(mesh: &Mesh, traj: &Trajectory) -> Self {
        let mut p = StrongSolutionProfile {
            iota: f64::INFINITY,
            max_density: 0.0,
            lipschitz_bound: 0.0,
            t_end: *traj.times.last().unwrap_or(&0.0),
        };
        for s in &traj.snapshots {
            p.iota = p.iota.min(s.min());
            p.max_density = p.max_density.max(s.max());
            for f in &mesh.faces {
                for i in 0..s.n_species {
                    p.lipschitz_bound = p.lipschitz_bound.max((s.get(f.b, i) - s.get(f.a, i)).abs() / f.distance);
                }
            }
        }
        p
    }
}

/// Mode `cos(pi x) cos(pi y)` scaled to the given L2 norm on the unit-area compartments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub amplitude: f64,
}

impl Perturbation {
    pub fn apply(&self, mesh: &Mesh, u: &StateField) -> StateField {
        let pi = std::f64::consts::PI;
        let total: f64 = mesh.cells.iter().map(|c| c.volume).sum();
        // the mode has mean square 1/4 per unit area
        let a = self.amplitude / (0.25 * total).sqrt();
        let mut out = u.clone();
        for (c, cell) in mesh.cells.iter().enumerate() {
            let d = a * (pi * cell.center[0]).cos() * (pi * cell.center[1]).cos();
            for v in out.cell_mut(c) {
                *v = (*v + d).max(0.0);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub t: f64,
    pub h_rel: f64,
    pub fractions: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    pub h_rel_0: f64,
    pub h_rel_t: f64,
    /// Smallest `C` with `H_rel(t) <= exp(C t) H_rel(0)` at every stored time; 0 when `H_rel(0) = 0`.
    pub fitted_c: f64,
    pub trunc: EntropyTruncation,
    pub reference: StrongSolutionProfile,
}

#[derive(Serialize)]
struct Summary {
    #[serde(rename = "H_rel_0")]
    h_rel_0: f64,
    #[serde(rename = "H_rel_T")]
    h_rel_t: f64,
    fitted_c: f64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "N")]
    n: f64,
}

impl StabilityReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,H_rel,frac_Sg,frac_Sp,frac_Sb,fitted_C")?;
        for r in &self.rows {
            let [g, p, b] = r.fractions;
            writeln!(w, "{:e},{:e},{:e},{:e},{:e},{:e}", r.t, r.h_rel, g, p, b, self.fitted_c)?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(Summary {
            h_rel_0: self.h_rel_0,
            h_rel_t: self.h_rel_t,
            fitted_c: self.fitted_c,
            e: self.trunc.e,
            n: self.trunc.n,
        })
        .expect("plain numbers serialize")
    }
}

/// Smallest `C` with `h(t) <= exp(C t) h(0)` on the series.
pub fn fit_growth(times: &[f64], h: &[f64]) -> f64 {
    let h0 = h[0];
    if h0 <= 0.0 {
        return 0.0;
    }
    times
        .iter()
        .zip(h)
        .skip(1)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, v)| if *v <= 0.0 { f64::NEG_INFINITY } else { (v / h0).ln() / t })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Runs the reference and the perturbed trajectory at twice the resolution of
/// `desc`, restricts both to the base mesh and tracks the relative entropy.
/// `trunc` defaults to `E = max(16, 8 n max U)`, `N = 4`.
pub fn stability_experiment(
    desc: &ScenarioDescriptor,
    perturbation: Perturbation,
    trunc: Option<EntropyTruncation>,
) -> Result<StabilityReport> {
    let coarse = Scenario::build(desc)?;
    let mut fine_desc = desc.clone();
    fine_desc.mesh.resolution *= 2;
    let fine = Scenario::build(&fine_desc)?;
    let map = coarse.mesh.coarsening_map(&fine.mesh)?;

    let reference = run(&fine)?;
    let profile = StrongSolutionProfile::of(&fine.mesh, &reference);
    if profile.iota < REFERENCE_FLOOR {
        return Err(Error::Abort(format!(
            "reference density drops to {:e}; it cannot serve as a strong solution",
            profile.iota
        )));
    }
    let u0 = perturbation.apply(&fine.mesh, &reference.snapshots[0]);
    let perturbed = run_from(&fine, u0)?;
    if perturbed.times.len() != reference.times.len() {
        return Err(Error::Abort("perturbed and reference runs stored different output times".into()));
    }

    let trunc = trunc.unwrap_or_else(|| EntropyTruncation::default_for(coarse.n_species(), profile.max_density));
    let setup = RelativeEntropySetup::standard(&coarse.geometry, &coarse.mesh, trunc)?;
    let mut rows = Vec::with_capacity(reference.times.len());
    for ((t, uu), u) in reference.times.iter().zip(&reference.snapshots).zip(&perturbed.snapshots) {
        let uu = uu.restrict(&fine.mesh, &coarse.mesh, &map);
        let u = u.restrict(&fine.mesh, &coarse.mesh, &map);
        let rel = relative_entropy(&coarse.mesh, &coarse.model, &setup, &u, &uu)?;
        rows.push(StabilityRow { t: *t, h_rel: rel.h_rel, fractions: rel.fractions });
    }
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let h: Vec<f64> = rows.iter().map(|r| r.h_rel).collect();
    let fitted_c = fit_growth(&times, &h);
    Ok(StabilityReport {
        h_rel_0: h[0],
        h_rel_t: *h.last().expect("at least the initial snapshot"),
        fitted_c,
        rows,
        trunc,
        reference: profile,
    })
}
