use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Scenario;
use crate::diagnostics::{dissipation, total_entropy};
use crate::error::{Error, Result};
use crate::field::StateField;
use crate::geometry::{Mesh, Side};

/// Result of one time step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: StateField,
    /// Mass added by flooring negative densities at zero.
    pub floored_mass: f64,
    /// Largest explicit change relative to the admissible change (accept if <= 1).
    pub change_ratio: f64,
    pub cg_iterations: usize,
}

/// One ledger line, written after every accepted step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    pub dt: f64,
    pub mass_plus: Vec<f64>,
    pub mass_minus: Vec<f64>,
    pub entropy: f64,
    pub d_bulk: [f64; 2],
    pub d_int: f64,
    pub floored_mass: f64,
}

impl LedgerRow {
    pub fn d_bulk_total(&self) -> f64 {
        self.d_bulk[0] + self.d_bulk[1]
    }
}

/// Snapshots at the output times plus the per-step ledger.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<StateField>,
    pub ledger: Vec<LedgerRow>,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateField {
        self.snapshots.last().expect("trajectory holds the initial state")
    }

    /// Largest relative change of any per-species total mass along the ledger.
    pub fn mass_drift(&self) -> f64 {
        let first = &self.ledger[0];
        let n = first.mass_plus.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let m0 = first.mass_plus[i] + first.mass_minus[i];
            for row in &self.ledger {
                let m = row.mass_plus[i] + row.mass_minus[i];
                worst = worst.max((m - m0).abs() / m0.abs().max(f64::MIN_POSITIVE));
            }
        }
        worst
    }

    pub fn total_initial_mass(&self) -> f64 {
        let r = &self.ledger[0];
        r.mass_plus.iter().chain(&r.mass_minus).sum()
    }

    pub fn floored_mass(&self) -> f64 {
        self.ledger.last().map_or(0.0, |r| r.floored_mass)
    }

    /// Ledger as CSV: `t,dt,mass_<i>_plus..,mass_<i>_minus..,H,D_bulk,D_int,floored_mass`.
    pub fn write_ledger_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.ledger.first().map_or(0, |r| r.mass_plus.len());
        let mut header = vec!["t".to_string(), "dt".to_string()];
        header.extend((1..=n).map(|i| format!("mass_{i}_plus")));
        header.extend((1..=n).map(|i| format!("mass_{i}_minus")));
        header.extend(["H", "D_bulk", "D_int", "floored_mass"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for r in &self.ledger {
            let mut cols = vec![r.t, r.dt];
            cols.extend(&r.mass_plus);
            cols.extend(&r.mass_minus);
            cols.extend([r.entropy, r.d_bulk_total(), r.d_int, r.floored_mass]);
            let line: Vec<String> = cols.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Values of the cells adjacent to each interface face on `side`.
pub fn interface_trace(mesh: &Mesh, state: &StateField, side: Side) -> Vec<Vec<f64>> {
    mesh.interface_faces
        .iter()
        .map(|f| {
            let c = if side == Side::Plus { f.plus } else { f.minus };
            state.cell(c).to_vec()
        })
        .collect()
}

/// Explicit source `f_eps + interface flux` per cell and species.
fn explicit_source(sc: &Scenario, u: &StateField) -> Vec<f64> {
    let n = sc.n_species();
    let eps = sc.solver.epsilon;
    let mut s = vec![0.0; u.values.len()];
    if sc.model.has_reaction() {
        for (c, cell) in sc.mesh.cells.iter().enumerate() {
            let f = sc.model.reaction_rate_eps(cell.side, u.cell(c), eps);
            s[c * n..(c + 1) * n].copy_from_slice(&f);
        }
    }
    for face in &sc.mesh.interface_faces {
        let r = sc.model.transmission_rate_eps(u.cell(face.plus), u.cell(face.minus), eps);
        let wp = face.length / sc.mesh.cells[face.plus].volume;
        let wm = face.length / sc.mesh.cells[face.minus].volume;
        for i in 0..n {
            s[face.plus * n + i] -= wp * r[i];
            s[face.minus * n + i] += wm * r[i];
        }
    }
    s
}

/// One semi-implicit step: explicit regularized rates, backward-Euler
/// diffusion, then flooring of negative densities.
pub fn step(sc: &Scenario, u: &StateField, dt: f64) -> Result<StepOutcome> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    let n = sc.n_species();
    let nc = sc.mesh.n_cells();
    let src = explicit_source(sc, u);
    let mut change_ratio: f64 = 0.0;
    for i in 0..n {
        let scale = (0..nc).map(|c| u.get(c, i)).fold(0.0, f64::max);
        for c in 0..nc {
            let allowed = sc.solver.max_relative_change * u.get(c, i).max(1e-3 * scale).max(1e-300);
            change_ratio = change_ratio.max((dt * src[c * n + i]).abs() / allowed);
        }
    }
    let mut next = StateField::zeros(nc, n);
    let mut cg_iterations = 0;
    let mut b = vec![0.0; nc];
    let mut x = vec![0.0; nc];
    for i in 0..n {
        for c in 0..nc {
            let v = sc.mesh.cells[c].volume;
            b[c] = v * (u.get(c, i) + dt * src[c * n + i]);
            x[c] = u.get(c, i);
        }
        cg_iterations += sc.diffusion.solve(i, dt, &b, &mut x, sc.solver.cg_tol)?;
        for (c, xc) in x.iter().enumerate() {
            next.values[c * n + i] = *xc;
        }
    }
    let mut floored_mass = 0.0;
    for c in 0..nc {
        let v = sc.mesh.cells[c].volume;
        for x in next.cell_mut(c) {
            if !x.is_finite() {
                return Err(Error::Abort("non-finite density".into()));
            }
            if *x < 0.0 {
                floored_mass += v * -*x;
                *x = 0.0;
            }
        }
    }
    Ok(StepOutcome { state: next, floored_mass, change_ratio, cg_iterations })
}

fn ledger_row(sc: &Scenario, u: &StateField, t: f64, dt: f64, floored: f64) -> LedgerRow {
    let n = sc.n_species();
    let d = dissipation(sc, u);
    LedgerRow {
        t,
        dt,
        mass_plus: (0..n).map(|i| u.mass(&sc.mesh, Side::Plus, i)).collect(),
        mass_minus: (0..n).map(|i| u.mass(&sc.mesh, Side::Minus, i)).collect(),
        entropy: total_entropy(sc, u),
        d_bulk: d.bulk,
        d_int: d.interface,
        floored_mass: floored,
    }
}

/// Integrates from the scenario's initial data to `t_end` with step control:
/// halve on a rejected step, grow by 1.2 (up to `dt_init`) after 10 clean steps.
pub fn run(sc: &Scenario) -> Result<Trajectory> {
    run_from(sc, sc.initial_state()?)
}

/// As [`run`], from explicit initial data.
pub fn run_from(sc: &Scenario, u0: StateField) -> Result<Trajectory> {
    let s = sc.solver;
    let mut u = u0;
    let mut t = 0.0;
    let mut dt = s.dt_init;
    let mut floored = 0.0;
    let mut clean = 0;
    let mut traj = Trajectory { times: vec![0.0], snapshots: vec![u.clone()], ledger: Vec::new() };
    traj.ledger.push(ledger_row(sc, &u, 0.0, 0.0, 0.0));
    let mut k_out = 1usize;
    let tol = 1e-12 * s.t_end;
    while t < s.t_end - tol {
        let target = if s.output_every > 0.0 { (k_out as f64 * s.output_every).min(s.t_end) } else { s.t_end };
        let (h, lands) = if t + dt >= target - tol { (target - t, true) } else { (dt, false) };
        let out = step(sc, &u, h)?;
        if out.change_ratio > 1.0 {
            dt = 0.5 * h.min(dt);
            clean = 0;
            if dt < s.dt_min {
                return Err(Error::Abort(format!("time step fell below dt_min = {} at t = {t}", s.dt_min)));
            }
            continue;
        }
        t = if lands { target } else { t + h };
        u = out.state;
        floored += out.floored_mass;
        traj.ledger.push(ledger_row(sc, &u, t, h, floored));
        if lands || s.output_every == 0.0 {
            traj.times.push(t);
            traj.snapshots.push(u.clone());
            if lands {
                k_out += 1;
            }
        }
        clean += 1;
        if clean >= 10 {
            dt = (dt * 1.2).min(s.dt_init);
            clean = 0;
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::builtin;

    fn scenario(name: &str, edit: impl FnOnce(&mut super::super::ScenarioDescriptor)) -> Scenario {
        let mut d = builtin(name).unwrap();
        edit(&mut d);
        Scenario::build(&d).unwrap()
    }

    #[test]
    fn nonpositive_dt_is_rejected() {
        let sc = scenario("flat_linear", |_| {});
        let u = sc.initial_state().unwrap();
        assert!(step(&sc, &u, 0.0).is_err());
        assert!(step(&sc, &u, -1.0).is_err());
    }

    #[test]
    fn constant_state_is_stationary() {
        let sc = scenario("flat_linear", |d| {
            for s in &mut d.initial {
                s.plus = super::super::Profile::Constant { value: 2.0 };
                s.minus = super::super::Profile::Constant { value: 2.0 };
            }
        });
        let u = sc.initial_state().unwrap();
        let out = step(&sc, &u, 1e-2).unwrap();
        assert!(out.state.sup_distance(&u) < 1e-12);
    }

    #[test]
    fn two_cell_relaxation_matches_ode() {
        let sc = scenario("flat_linear", |d| {
            d.mesh.resolution = 2;
            d.model.k_i = vec![1.0, 1.0];
            d.solver.epsilon = 1e-12;
            for s in &mut d.initial {
                s.plus = super::super::Profile::Constant { value: 3.0 };
                s.minus = super::super::Profile::Constant { value: 1.0 };
            }
        });
        let u0 = sc.initial_state().unwrap();
        let dt = 1e-4;
        let out = step(&sc, &u0, dt).unwrap();
        // d/dt u+ = -(|Gamma|/|Omega+|) k (u+ - u-), compartments are uniform
        let expected = 3.0 - dt * 1.0 * 2.0;
        let avg = out.state.mass(&sc.mesh, Side::Plus, 0) / sc.mesh.side_volume(Side::Plus);
        assert!((avg - expected).abs() < 1e-12, "{avg}");
    }

    #[test]
    fn run_records_ledger_and_snapshots() {
        let sc = scenario("flat_linear", |d| {
            d.mesh.resolution = 4;
            d.solver.t_end = 0.1;
            d.solver.output_every = 0.05;
        });
        let traj = run(&sc).unwrap();
        assert_eq!(traj.times, vec![0.0, 0.05, 0.1]);
        assert!(traj.mass_drift() < 1e-12);
        let mut buf = Vec::new();
        traj.write_ledger_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,dt,mass_1_plus,mass_2_plus,mass_1_minus,mass_2_minus,H,D_bulk,D_int,floored_mass\n"));
    }

    #[test]
    fn tiny_dt_min_aborts() {
        let sc = scenario("flat_linear", |d| {
            d.mesh.resolution = 4;
            d.solver.max_relative_change = 1e-9;
            d.solver.dt_min = 1e-4;
        });
        assert!(matches!(run(&sc), Err(Error::Abort(_))));
    }
}
