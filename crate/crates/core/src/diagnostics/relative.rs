use serde::{Deserialize, Serialize};

use super::truncation::EntropyTruncation;
use crate::error::{Error, Result};
use crate::field::StateField;
use crate::geometry::{
    reflection_map, Geometry, Mesh, PartitionOfUnity, PouValues, ReflectionMap, ReflectionPartners,
};
use crate::kinetics::{relative_boltzmann, KineticModel};

/// Cell classes of the relative entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellClass {
    /// Every truncation is 1 (`chi = 1`).
    Good,
    /// Truncated and the local density is at least `E/2`.
    Large,
    /// Truncated only because a reflected partner is large.
    Bad,
}

/// Partition of unity, reflection partners and truncation for one mesh.
#[derive(Debug, Clone)]
pub struct RelativeEntropySetup {
    pub pou: PartitionOfUnity,
    pub maps: Vec<ReflectionMap>,
    pub partners: Vec<ReflectionPartners>,
    pub trunc: EntropyTruncation,
    weights: Vec<PouValues>,
}

/// Per-cell truncation, classification and the integrated relative entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeEntropyState {
    pub chi: Vec<f64>,
    pub class: Vec<CellClass>,
    pub density: Vec<f64>,
    pub h_rel: f64,
    /// Volume fractions of the good, large and bad classes.
    pub fractions: [f64; 3],
    /// Volume of the bad class.
    pub bad_volume: f64,
}

/// Default bump radius; small enough for sheared maps at the interface endpoints of both templates.
pub const DEFAULT_BUMP_RADIUS: f64 = 0.14;

/// Ratio between the map radius and the bump radius at interface endpoints.
/// Any disc of radius `rho` around the anchor fits in a sheared cylinder of
/// radius `sqrt(2) rho` when the heights have slope at most 1.
const SHEARED_RADIUS_FACTOR: f64 = 1.45;

impl RelativeEntropySetup {
    pub fn new(geometry: &Geometry, mesh: &Mesh, pou: PartitionOfUnity, trunc: EntropyTruncation) -> Result<Self> {
        let endpoints = geometry.interface_endpoints();
        let mut maps = Vec::with_capacity(pou.anchors.len());
        let mut partners = Vec::with_capacity(pou.anchors.len());
        for (a, r) in pou.anchors.iter().zip(&pou.radii) {
            let at_end = endpoints.iter().any(|e| crate::geometry::polygon::dist(*e, *a) < 1e-12);
            let radius = if at_end { SHEARED_RADIUS_FACTOR * r } else { *r };
            let map = reflection_map(geometry, *a, radius)?;
            partners.push(ReflectionPartners::build(&map, mesh)?);
            maps.push(map);
        }
        let weights: Vec<PouValues> = mesh.cells.iter().map(|c| pou.eval(c.center)).collect();
        for (c, w) in weights.iter().enumerate() {
            for (b, phi) in w.anchors.iter().enumerate() {
                if *phi > 0.0 && partners[b].partner[c].is_none() {
                    return Err(Error::Precondition(format!(
                        "cell {c} carries weight of anchor {:?} but has no reflected partner",
                        pou.anchors[b]
                    )));
                }
            }
        }
        Ok(RelativeEntropySetup { pou, maps, partners, trunc, weights })
    }

    /// Evenly spaced anchors along the interface with [`DEFAULT_BUMP_RADIUS`].
    pub fn standard(geometry: &Geometry, mesh: &Mesh, trunc: EntropyTruncation) -> Result<Self> {
        let longest = geometry
            .interface
            .iter()
            .map(|s| crate::geometry::polygon::dist(s[0], s[1]))
            .fold(0.0, f64::max);
        let per_segment = (longest / (0.9 * DEFAULT_BUMP_RADIUS)).ceil() as usize + 1;
        let pou = PartitionOfUnity::uniform(geometry, per_segment, DEFAULT_BUMP_RADIUS)?;
        RelativeEntropySetup::new(geometry, mesh, pou, trunc)
    }

    pub fn weights(&self, c: usize) -> &PouValues {
        &self.weights[c]
    }

    /// `chi = phi_out zeta*(u) + sum_b phi_b xi*(u, u~_b)` at cell `c`.
    pub fn chi(&self, u: &StateField, c: usize) -> f64 {
        let w = &self.weights[c];
        let own: f64 = u.cell(c).iter().sum();
        let mut chi = w.outer * self.trunc.of_total(own);
        for (b, phi) in w.anchors.iter().enumerate() {
            if *phi > 0.0 {
                let p = self.partners[b].partner[c].expect("coverage checked at construction");
                let other: f64 = u.cell(p).iter().sum();
                chi += phi * self.trunc.of_total(own + other);
            }
        }
        chi
    }

    /// `1 - chi`, accumulated from the complements so that it is exactly 0 on the plateau.
    fn one_minus_chi(&self, u: &StateField, c: usize) -> f64 {
        let w = &self.weights[c];
        let own: f64 = u.cell(c).iter().sum();
        let mut rest = w.outer * (1.0 - self.trunc.of_total(own));
        for (b, phi) in w.anchors.iter().enumerate() {
            if *phi > 0.0 {
                let p = self.partners[b].partner[c].expect("coverage checked at construction");
                let other: f64 = u.cell(p).iter().sum();
                rest += phi * (1.0 - self.trunc.of_total(own + other));
            }
        }
        rest
    }
}

/// Truncated relative entropy of `u` with respect to the positive reference `reference`:
/// `sum_j [u_j ln(u_j/U_j) - u_j + U_j] + (1 - chi) sum_j u_j ln(U_j / u_ref_j)`.
/// The entropy shift never enters, so both conventions give identical values.
pub fn relative_entropy(
    mesh: &Mesh,
    model: &KineticModel,
    setup: &RelativeEntropySetup,
    u: &StateField,
    reference: &StateField,
) -> Result<RelativeEntropyState> {
    if reference.values.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::Precondition("reference densities must be strictly positive".into()));
    }
    if u.values.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::Domain("densities must be nonnegative".into()));
    }
    let n = u.n_species;
    let total_volume: f64 = mesh.cells.iter().map(|c| c.volume).sum();
    let mut out = RelativeEntropyState {
        chi: Vec::with_capacity(mesh.n_cells()),
        class: Vec::with_capacity(mesh.n_cells()),
        density: Vec::with_capacity(mesh.n_cells()),
        h_rel: 0.0,
        fractions: [0.0; 3],
        bad_volume: 0.0,
    };
    for (c, cell) in mesh.cells.iter().enumerate() {
        let refs = &model.u_ref[cell.side.index()];
        let uc = u.cell(c);
        let uu = reference.cell(c);
        let rest = setup.one_minus_chi(u, c);
        let mut h = 0.0;
        for j in 0..n {
            h += relative_boltzmann(uc[j], uu[j]);
        }
        if rest != 0.0 {
            h += rest * (0..n).map(|j| uc[j] * (uu[j] / refs[j]).ln()).sum::<f64>();
        }
        let class = if rest == 0.0 {
            CellClass::Good
        } else if uc.iter().sum::<f64>() >= 0.5 * setup.trunc.e {
            CellClass::Large
        } else {
            CellClass::Bad
        };
        let k = match class {
            CellClass::Good => 0,
            CellClass::Large => 1,
            CellClass::Bad => 2,
        };
        out.fractions[k] += cell.volume / total_volume;
        if class == CellClass::Bad {
            out.bad_volume += cell.volume;
        }
        out.h_rel += cell.volume * h;
        out.density.push(h);
        out.chi.push(1.0 - rest);
        out.class.push(class);
    }
    Ok(out)
}

/// Empirical coercivity ratios of one relative-entropy evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub h_rel: f64,
    /// `sum_c |c| sum_j (sqrt u_j - sqrt U_j)^2`.
    pub sqrt_distance: f64,
    /// `H_rel / sqrt_distance`, absent when the distance vanishes.
    pub ratio_sqrt: Option<f64>,
    /// `H_rel / (E ln E |bad class|)`, absent when the bad class is empty.
    pub ratio_bad: Option<f64>,
}

pub fn coercivity_check(
    mesh: &Mesh,
    rel: &RelativeEntropyState,
    trunc: &EntropyTruncation,
    u: &StateField,
    reference: &StateField,
) -> CoercivityReport {
    let mut d = 0.0;
    for (c, cell) in mesh.cells.iter().enumerate() {
        let s: f64 = u.cell(c).iter().zip(reference.cell(c)).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
        d += cell.volume * s;
    }
    CoercivityReport {
        h_rel: rel.h_rel,
        sqrt_distance: d,
        ratio_sqrt: (d > 0.0).then(|| rel.h_rel / d),
        ratio_bad: (rel.bad_volume > 0.0).then(|| rel.h_rel / (trunc.e * trunc.e.ln() * rel.bad_volume)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Side;
    use crate::solver::Scenario;

    fn setup() -> (Scenario, RelativeEntropySetup, StateField) {
        let sc = Scenario::build(&crate::scenarios::builtin("flat_linear").unwrap()).unwrap();
        let reference = sc.initial_state().unwrap();
        let trunc = EntropyTruncation::default_for(sc.n_species(), reference.max());
        let rs = RelativeEntropySetup::standard(&sc.geometry, &sc.mesh, trunc).unwrap();
        (sc, rs, reference)
    }

    #[test]
    fn identical_states_have_zero_relative_entropy() {
        let (sc, rs, reference) = setup();
        let rel = relative_entropy(&sc.mesh, &sc.model, &rs, &reference, &reference).unwrap();
        assert_eq!(rel.h_rel, 0.0);
        assert!(rel.class.iter().all(|c| *c == CellClass::Good));
        assert!(rel.chi.iter().all(|x| *x == 1.0));
    }

    #[test]
    fn partition_weights_sum_to_one() {
        let (sc, rs, _) = setup();
        for c in 0..sc.mesh.n_cells() {
            let w = rs.weights(c);
            assert!((w.outer + w.anchors.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_compartment_leaves_the_plateau() {
        let (sc, rs, reference) = setup();
        let m = 4.0 * rs.trunc.e;
        let u = StateField::from_fn(&sc.mesh, 2, |c, i| {
            let v = reference.get(c, i);
            if sc.mesh.cells[c].side == Side::Plus {
                m * v
            } else {
                v
            }
        });
        let rel = relative_entropy(&sc.mesh, &sc.model, &rs, &u, &reference).unwrap();
        let near = sc.mesh.locate([0.01, 0.5]).unwrap();
        assert!(rel.chi[near] < 1.0);
        let mirrored = sc.mesh.locate([-0.01, 0.5]).unwrap();
        assert!(rel.chi[mirrored] < 1.0);
        assert_eq!(rel.class[mirrored], CellClass::Bad);
        assert!(rel.h_rel > 0.0);
        assert!(rel.chi.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn shift_convention_does_not_matter() {
        let (sc, rs, reference) = setup();
        let u = StateField::from_fn(&sc.mesh, 2, |c, i| reference.get(c, i) * (1.0 + 0.1 * ((c + i) % 3) as f64));
        let mut other = sc.model.clone();
        other.shifted = !other.shifted;
        let a = relative_entropy(&sc.mesh, &sc.model, &rs, &u, &reference).unwrap();
        let b = relative_entropy(&sc.mesh, &other, &rs, &u, &reference).unwrap();
        assert_eq!(a.h_rel, b.h_rel);
    }

    #[test]
    fn rejects_nonpositive_reference() {
        let (sc, rs, reference) = setup();
        let mut bad = reference.clone();
        bad.values[0] = 0.0;
        assert!(relative_entropy(&sc.mesh, &sc.model, &rs, &reference, &bad).is_err());
    }
}
