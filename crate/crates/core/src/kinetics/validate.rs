//! Randomized checks of the structural hypotheses on the rates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::KineticModel;
use crate::error::{Error, Result};
use crate::geometry::Side;

/// Worst violations found; each entry is `max(0, violation)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// `max f . Dh` over both compartments.
    pub reaction_dissipation: f64,
    /// `max -(r+ . Dh(u+) + r- . Dh(u-))`.
    pub interface_dissipation: f64,
    /// `max |r+ + r-|`.
    pub mass_defect: f64,
    /// Largest wrong-signed rate at a vanishing density.
    pub quasi_positivity: f64,
    pub samples: usize,
}

impl HypothesisReport {
    pub fn worst(&self) -> f64 {
        self.reaction_dissipation
            .max(self.interface_dissipation)
            .max(self.mass_defect)
            .max(self.quasi_positivity)
    }

    pub fn conforming(&self, tol: f64) -> bool {
        self.worst() <= tol && self.mass_defect == 0.0
    }
}

/// Log-uniform density vector in `[lo, hi]^n`.
pub fn log_uniform(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|_| rng.random_range(a..b).exp()).collect()
}

type ReactionFn<'a> = dyn Fn(Side, &[f64]) -> Vec<f64> + 'a;
type TransmissionFn<'a> = dyn Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + 'a;

/// Generic validator over arbitrary rate functions and entropy gradients.
pub fn validate_rates(
    n: usize,
    reaction: &ReactionFn<'_>,
    transmission: &TransmissionFn<'_>,
    log_ref: [&[f64]; 2],
    n_samples: usize,
    seed: u64,
) -> Result<HypothesisReport> {
    if n_samples < 1000 {
        return Err(Error::Config(format!("need at least 1000 samples, got {n_samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = HypothesisReport {
        reaction_dissipation: 0.0,
        interface_dissipation: 0.0,
        mass_defect: 0.0,
        quasi_positivity: 0.0,
        samples: n_samples,
    };
    let dh = |u: &[f64], side: Side| -> Vec<f64> {
        u.iter().zip(log_ref[side.index()]).map(|(x, r)| (x / r).ln()).collect()
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for _ in 0..n_samples {
        let up = log_uniform(&mut rng, n, 1e-3, 1e3);
        let um = log_uniform(&mut rng, n, 1e-3, 1e3);
        for (side, u) in [(Side::Plus, &up), (Side::Minus, &um)] {
            let f = reaction(side, u);
            rep.reaction_dissipation = rep.reaction_dissipation.max(dot(&f, &dh(u, side)));
            for i in 0..n {
                let mut z = u.clone();
                z[i] = 0.0;
                rep.quasi_positivity = rep.quasi_positivity.max(-reaction(side, &z)[i]);
            }
        }
        let (rp, rm) = transmission(&up, &um);
        let diss = dot(&rp, &dh(&up, Side::Plus)) + dot(&rm, &dh(&um, Side::Minus));
        rep.interface_dissipation = rep.interface_dissipation.max(-diss);
        for i in 0..n {
            rep.mass_defect = rep.mass_defect.max((rp[i] + rm[i]).abs());
            let mut zp = up.clone();
            zp[i] = 0.0;
            rep.quasi_positivity = rep.quasi_positivity.max(transmission(&zp, &um).0[i]);
            let mut zm = um.clone();
            zm[i] = 0.0;
            rep.quasi_positivity = rep.quasi_positivity.max(transmission(&up, &zm).1[i]);
        }
    }
    Ok(rep)
}

/// Checks dissipation, mass conservation and quasi-positivity of `model` on
/// log-uniform samples in `[1e-3, 1e3]`.
pub fn validate_hypotheses(model: &KineticModel, n_samples: usize, seed: u64) -> Result<HypothesisReport> {
    let reaction = |side: Side, u: &[f64]| model.reaction_rate(side, u);
    let transmission = |p: &[f64], m: &[f64]| {
        let r = model.transmission_rate(p, m);
        let neg = r.iter().map(|x| -x).collect();
        (r, neg)
    };
    validate_rates(
        model.n_species,
        &reaction,
        &transmission,
        [&model.u_ref[0], &model.u_ref[1]],
        n_samples,
        seed,
    )
}
