use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::field::StateField;
use crate::geometry::{Mesh, Side};
use crate::kinetics::{EntropyDensity, KineticModel};
use crate::solver::{Scenario, Trajectory};

/// Dissipation split by mechanism; `bulk = diffusion + reaction` per compartment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dissipation {
    pub diffusion: [f64; 2],
    pub reaction: [f64; 2],
    pub bulk: [f64; 2],
    pub interface: f64,
}

/// `sum_c |c| h(u_c)` with the model's entropy convention.
pub fn total_entropy(sc: &Scenario, u: &StateField) -> f64 {
    total_entropy_with(&sc.mesh, &sc.model, u)
}

pub fn total_entropy_with(mesh: &Mesh, model: &KineticModel, u: &StateField) -> f64 {
    let h = [model.entropy(Side::Plus), model.entropy(Side::Minus)];
    mesh.cells
        .iter()
        .enumerate()
        .map(|(c, cell)| cell.volume * h[cell.side.index()].value(u.cell(c)).expect("densities are nonnegative"))
        .sum()
}

/// `-f . Dh(u)` with `Dh` floored at zero densities.
pub fn reaction_dissipation_density(model: &KineticModel, side: Side, u: &[f64], eps: Option<f64>) -> f64 {
    let f = match eps {
        Some(e) => model.reaction_rate_eps(side, u, e),
        None => model.reaction_rate(side, u),
    };
    let g = model.entropy(side).gradient_floored(u);
    -f.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
}

/// `r+ . Dh(u+) + r- . Dh(u-)`.
pub fn interface_dissipation_density(model: &KineticModel, plus: &[f64], minus: &[f64], eps: Option<f64>) -> f64 {
    let r = match eps {
        Some(e) => model.transmission_rate_eps(plus, minus, e),
        None => model.transmission_rate(plus, minus),
    };
    let gp = model.entropy(Side::Plus).gradient_floored(plus);
    let gm = model.entropy(Side::Minus).gradient_floored(minus);
    r.iter().zip(gp.iter().zip(&gm)).map(|(r, (a, b))| r * (a - b)).sum()
}

/// Discrete dissipation of the regularized system at state `u`: Fisher
/// information `4 sum_f T_f (sqrt u_b - sqrt u_a)^2`, reaction and interface terms.
pub fn dissipation(sc: &Scenario, u: &StateField) -> Dissipation {
    let n = sc.n_species();
    let eps = Some(sc.solver.epsilon);
    let mut d = Dissipation { diffusion: [0.0; 2], reaction: [0.0; 2], bulk: [0.0; 2], interface: 0.0 };
    for (f, face) in sc.mesh.faces.iter().enumerate() {
        let side = sc.mesh.cells[face.a].side.index();
        for i in 0..n {
            let ds = u.get(face.b, i).sqrt() - u.get(face.a, i).sqrt();
            d.diffusion[side] += 4.0 * sc.diffusion.trans[i][f] * ds * ds;
        }
    }
    if sc.model.has_reaction() {
        for (c, cell) in sc.mesh.cells.iter().enumerate() {
            d.reaction[cell.side.index()] +=
                cell.volume * reaction_dissipation_density(&sc.model, cell.side, u.cell(c), eps);
        }
    }
    for face in &sc.mesh.interface_faces {
        d.interface += face.length * interface_dissipation_density(&sc.model, u.cell(face.plus), u.cell(face.minus), eps);
    }
    for k in 0..2 {
        d.bulk[k] = d.diffusion[k] + d.reaction[k];
    }
    d
}

/// Entropy of a constant state on a domain of the given volume.
pub fn entropy_of_constant(h: &EntropyDensity, u: &[f64], volume: f64) -> f64 {
    volume * h.value(u).expect("nonnegative densities")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub t: f64,
    pub entropy: f64,
    pub d_bulk_plus: f64,
    pub d_bulk_minus: f64,
    pub d_int: f64,
    pub defect: f64,
}

/// Defect of the discrete entropy inequality along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyCheck {
    pub rows: Vec<EntropyRow>,
    /// `max(0, max_k defect_k)`.
    pub max_defect: f64,
}

impl EntropyCheck {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,H,D_bulk_plus,D_bulk_minus,D_int,defect")?;
        for r in &self.rows {
            writeln!(w, "{:e},{:e},{:e},{:e},{:e},{:e}", r.t, r.entropy, r.d_bulk_plus, r.d_bulk_minus, r.d_int, r.defect)?;
        }
        Ok(())
    }
}

/// `defect_k = H(t_k) + sum_{j<=k} dt_j D(t_j) - H(0)` with the dissipation
/// taken at the end of each step.
pub fn entropy_inequality_check(traj: &Trajectory) -> EntropyCheck {
    let h0 = traj.ledger[0].entropy;
    let mut acc = 0.0;
    let mut rows = Vec::with_capacity(traj.ledger.len());
    let mut max_defect: f64 = 0.0;
    for r in &traj.ledger {
        acc += r.dt * (r.d_bulk_total() + r.d_int);
        let defect = r.entropy + acc - h0;
        max_defect = max_defect.max(defect);
        rows.push(EntropyRow {
            t: r.t,
            entropy: r.entropy,
            d_bulk_plus: r.d_bulk[0],
            d_bulk_minus: r.d_bulk[1],
            d_int: r.d_int,
            defect,
        });
    }
    EntropyCheck { rows, max_defect }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(json: &str) -> KineticModel {
        KineticModel::from_json(json).unwrap()
    }

    #[test]
    fn constant_state_entropies() {
        let one = EntropyDensity::unit(1, true);
        assert_eq!(entropy_of_constant(&one, &[1.0], 2.0), 0.0);
        let raw = EntropyDensity::unit(1, false);
        assert!(entropy_of_constant(&raw, &[std::f64::consts::E], 2.0).abs() < 1e-15);
        let v = entropy_of_constant(&raw, &[2.0], 2.0);
        assert!((v - 2.0 * (2.0 * 2f64.ln() - 2.0)).abs() < 1e-15);
        assert!((v + 1.2274).abs() < 1e-4);
    }

    #[test]
    fn dissipation_density_examples() {
        let m = model(r#"{"n_species":2,"alpha":[1,0],"beta":[0,1],"k_plus":1,"k_i":[0,0],"transmission_variant":"linear"}"#);
        let d = reaction_dissipation_density(&m, Side::Plus, &[2.0, 1.0], None);
        assert!((d - 2f64.ln()).abs() < 1e-15);
        let m = model(r#"{"n_species":1,"k_i":[1],"transmission_variant":"linear"}"#);
        let d = interface_dissipation_density(&m, &[4.0], &[1.0], None);
        assert!((d - 3.0 * 4f64.ln()).abs() < 1e-14);
        assert!((d - 4.1589).abs() < 1e-4);
    }
}
