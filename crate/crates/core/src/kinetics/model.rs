use serde::{Deserialize, Serialize};

use super::{regularize_unchecked, EntropyDensity, LOG_FLOOR};
use crate::error::{config, Result};
use crate::geometry::Side;

/// Bulk reaction term.
#[derive(Debug, Clone, PartialEq)]
pub enum BulkReaction {
    /// Single reversible mass-action reaction `alpha <-> beta`, rate constant per compartment.
    MassAction { alpha: Vec<u32>, beta: Vec<u32>, k: [f64; 2] },
    /// `f_i = k log(u_i / u_ref_i)`: produces entropy, kept as a negative control.
    LogGrowth { k: [f64; 2] },
}

/// Coefficient families for the nonlinear-coefficient transmission law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientForm {
    /// `k_i`
    Constant,
    /// `k_i (1 + |u+|_1 + |u-|_1)` in reference units
    TotalDensity,
    /// `k_i (1 + a b) / (1 + a + b)` with `a`, `b` the two traces of species `i`
    Saturating,
}

impl CoefficientForm {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "constant" => Ok(CoefficientForm::Constant),
            "total_density" => Ok(CoefficientForm::TotalDensity),
            "saturating" => Ok(CoefficientForm::Saturating),
            other => config(format!("unknown coefficient form `{other}`")),
        }
    }

    pub fn eval(self, k: f64, i: usize, plus: &[f64], minus: &[f64]) -> f64 {
        match self {
            CoefficientForm::Constant => k,
            CoefficientForm::TotalDensity => {
                k * (1.0 + plus.iter().sum::<f64>() + minus.iter().sum::<f64>())
            }
            CoefficientForm::Saturating => {
                let (a, b) = (plus[i], minus[i]);
                k * (1.0 + a * b) / (1.0 + a + b)
            }
        }
    }
}

/// Interface flux law; rates are the outflow `r+` from the plus compartment.
#[derive(Debug, Clone, PartialEq)]
pub enum TransmissionModel {
    /// `r_i = k_i (u+_i - u-_i)`
    Linear { k: Vec<f64> },
    /// `r_i = k (gamma_i - delta_i) (prod u+^gamma u-^delta - prod u+^delta u-^gamma)`
    Polynomial { gamma: Vec<u32>, delta: Vec<u32>, k: f64 },
    /// `r_i = k_i(u+, u-) ((u+_i)^gamma_i - (u-_i)^gamma_i)`
    NonlinearCoefficient { gamma: Vec<u32>, k: Vec<f64>, form: CoefficientForm },
}

/// Model description as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    pub n_species: usize,
    #[serde(default)]
    pub alpha: Vec<u32>,
    #[serde(default)]
    pub beta: Vec<u32>,
    #[serde(default)]
    pub gamma: Vec<u32>,
    #[serde(default)]
    pub delta: Vec<u32>,
    #[serde(default)]
    pub k_plus: f64,
    #[serde(default)]
    pub k_minus: f64,
    #[serde(default)]
    pub k_gamma: f64,
    #[serde(default)]
    pub k_i: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_ref_plus: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_ref_minus: Option<Vec<f64>>,
    pub transmission_variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_form: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bulk_variant: Option<String>,
    #[serde(default = "default_true")]
    pub entropy_shift: bool,
}

fn default_true() -> bool {
    true
}

/// Validated kinetics of both compartments and the interface.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticModel {
    pub n_species: usize,
    pub bulk: BulkReaction,
    pub transmission: TransmissionModel,
    pub u_ref: [Vec<f64>; 2],
    pub shifted: bool,
}

fn ubar(u: &[f64], r: &[f64]) -> Vec<f64> {
    u.iter().zip(r).map(|(a, b)| a / b).collect()
}

fn monomial(u: &[f64], exps: &[u32]) -> f64 {
    u.iter().zip(exps).map(|(x, e)| x.powi(*e as i32)).product()
}

impl KineticModel {
    pub fn from_descriptor(d: &ModelDescriptor) -> Result<KineticModel> {
        let n = d.n_species;
        if n == 0 {
            return config("n_species must be positive");
        }
        let len_ok = |v: usize| v == n;
        let fill = |v: &Vec<u32>| if v.is_empty() { vec![0; n] } else { v.clone() };
        for (name, k) in [("k_plus", d.k_plus), ("k_minus", d.k_minus), ("k_gamma", d.k_gamma)] {
            if !(k >= 0.0) || !k.is_finite() {
                return config(format!("{name} must be a nonnegative number"));
            }
        }
        if d.k_i.iter().any(|k| !(*k >= 0.0) || !k.is_finite()) {
            return config("k_i must be nonnegative");
        }
        let u_ref_plus = d.u_ref_plus.clone().unwrap_or_else(|| vec![1.0; n]);
        let u_ref_minus = d.u_ref_minus.clone().unwrap_or_else(|| vec![1.0; n]);
        for r in [&u_ref_plus, &u_ref_minus] {
            if !len_ok(r.len()) || r.iter().any(|x| !(*x > 0.0)) {
                return config("reference densities must be positive with one entry per species");
            }
        }
        let (alpha, beta) = (fill(&d.alpha), fill(&d.beta));
        if !len_ok(alpha.len()) || !len_ok(beta.len()) {
            return config("alpha and beta need one entry per species");
        }
        let bulk = match d.bulk_variant.as_deref().unwrap_or("mass_action") {
            "mass_action" => BulkReaction::MassAction { alpha, beta, k: [d.k_plus, d.k_minus] },
            "log_growth" => BulkReaction::LogGrowth { k: [d.k_plus, d.k_minus] },
            other => return config(format!("unknown bulk variant `{other}`")),
        };
        let k_i = || -> Result<Vec<f64>> {
            if len_ok(d.k_i.len()) {
                Ok(d.k_i.clone())
            } else {
                config("k_i needs one entry per species")
            }
        };
        let transmission = match d.transmission_variant.as_str() {
            "linear" => TransmissionModel::Linear { k: k_i()? },
            "polynomial" => {
                let (gamma, delta) = (fill(&d.gamma), fill(&d.delta));
                if !len_ok(gamma.len()) || !len_ok(delta.len()) {
                    return config("gamma and delta need one entry per species");
                }
                TransmissionModel::Polynomial { gamma, delta, k: d.k_gamma }
            }
            "nonlinear_coefficient" => {
                let gamma = if d.gamma.is_empty() { vec![1; n] } else { d.gamma.clone() };
                if !len_ok(gamma.len()) || gamma.contains(&0) {
                    return config("gamma needs one positive entry per species");
                }
                let form = CoefficientForm::parse(d.coefficient_form.as_deref().unwrap_or("constant"))?;
                TransmissionModel::NonlinearCoefficient { gamma, k: k_i()?, form }
            }
            other => return config(format!("unknown transmission variant `{other}`")),
        };
        Ok(KineticModel { n_species: n, bulk, transmission, u_ref: [u_ref_plus, u_ref_minus], shifted: d.entropy_shift })
    }

    pub fn from_json(text: &str) -> Result<KineticModel> {
        let d: ModelDescriptor = serde_json::from_str(text)?;
        KineticModel::from_descriptor(&d)
    }

    pub fn entropy(&self, side: Side) -> EntropyDensity {
        EntropyDensity { u_ref: self.u_ref[side.index()].clone(), shifted: self.shifted }
    }

    /// Unregularized bulk rate `f^side(u)`.
    pub fn reaction_rate(&self, side: Side, u: &[f64]) -> Vec<f64> {
        let r = &self.u_ref[side.index()];
        match &self.bulk {
            BulkReaction::MassAction { alpha, beta, k } => {
                let k = k[side.index()];
                if k == 0.0 {
                    return vec![0.0; self.n_species];
                }
                let ub = ubar(u, r);
                let diff = monomial(&ub, alpha) - monomial(&ub, beta);
                alpha.iter().zip(beta).map(|(a, b)| -k * (*a as f64 - *b as f64) * diff).collect()
            }
            BulkReaction::LogGrowth { k } => {
                let k = k[side.index()];
                u.iter().zip(r).map(|(x, r)| k * (x.max(LOG_FLOOR) / r).ln()).collect()
            }
        }
    }

    /// Unregularized outflow `r+` from the plus compartment; `r- = -r+`.
    pub fn transmission_rate(&self, plus: &[f64], minus: &[f64]) -> Vec<f64> {
        let a = ubar(plus, &self.u_ref[0]);
        let b = ubar(minus, &self.u_ref[1]);
        match &self.transmission {
            TransmissionModel::Linear { k } => (0..self.n_species).map(|i| k[i] * (a[i] - b[i])).collect(),
            TransmissionModel::Polynomial { gamma, delta, k } => {
                let p: f64 = (0..self.n_species)
                    .map(|i| a[i].powi(gamma[i] as i32) * b[i].powi(delta[i] as i32))
                    .product();
                let q: f64 = (0..self.n_species)
                    .map(|i| a[i].powi(delta[i] as i32) * b[i].powi(gamma[i] as i32))
                    .product();
                (0..self.n_species).map(|i| k * (gamma[i] as f64 - delta[i] as f64) * (p - q)).collect()
            }
            TransmissionModel::NonlinearCoefficient { gamma, k, form } => (0..self.n_species)
                .map(|i| {
                    let g = gamma[i] as i32;
                    form.eval(k[i], i, &a, &b) * (a[i].powi(g) - b[i].powi(g))
                })
                .collect(),
        }
    }

    /// Transmission rate of `side`: `r+` or `-r+`.
    pub fn transmission_rate_side(&self, side: Side, plus: &[f64], minus: &[f64]) -> Vec<f64> {
        let r = self.transmission_rate(plus, minus);
        match side {
            Side::Plus => r,
            Side::Minus => r.into_iter().map(|x| -x).collect(),
        }
    }

    pub fn reaction_rate_eps(&self, side: Side, u: &[f64], eps: f64) -> Vec<f64> {
        regularize_unchecked(&self.reaction_rate(side, u), eps)
    }

    pub fn transmission_rate_eps(&self, plus: &[f64], minus: &[f64], eps: f64) -> Vec<f64> {
        regularize_unchecked(&self.transmission_rate(plus, minus), eps)
    }

    pub fn has_reaction(&self) -> bool {
        match &self.bulk {
            BulkReaction::MassAction { alpha, beta, k } => alpha != beta && (k[0] > 0.0 || k[1] > 0.0),
            BulkReaction::LogGrowth { k } => k[0] != 0.0 || k[1] != 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(json: &str) -> KineticModel {
        KineticModel::from_json(json).unwrap()
    }

    #[test]
    fn mass_action_examples() {
        let m = model(r#"{"n_species":2,"alpha":[1,0],"beta":[0,1],"k_plus":1,"k_i":[0,0],"transmission_variant":"linear"}"#);
        assert_eq!(m.reaction_rate(Side::Plus, &[2.0, 1.0]), vec![-1.0, 1.0]);
        assert_eq!(m.reaction_rate(Side::Minus, &[2.0, 1.0]), vec![0.0, 0.0]);
        let m = model(r#"{"n_species":2,"alpha":[2,0],"beta":[0,1],"k_plus":1,"k_i":[0,0],"transmission_variant":"linear"}"#);
        assert_eq!(m.reaction_rate(Side::Plus, &[1.0, 2.0]), vec![2.0, -1.0]);
    }

    #[test]
    fn transmission_examples() {
        let m = model(r#"{"n_species":1,"k_i":[2],"transmission_variant":"linear"}"#);
        assert_eq!(m.transmission_rate_side(Side::Plus, &[3.0], &[1.0]), vec![4.0]);
        assert_eq!(m.transmission_rate_side(Side::Minus, &[3.0], &[1.0]), vec![-4.0]);
        let m = model(r#"{"n_species":1,"gamma":[1],"delta":[0],"k_gamma":1,"transmission_variant":"polynomial"}"#);
        assert_eq!(m.transmission_rate(&[4.0], &[1.0]), vec![3.0]);
        let m = model(r#"{"n_species":1,"gamma":[2],"k_i":[0.5],"transmission_variant":"nonlinear_coefficient","coefficient_form":"saturating"}"#);
        let r = m.transmission_rate(&[2.0], &[1.0]);
        assert!((r[0] - 0.5 * 3.0 / 4.0 * 3.0).abs() < 1e-15);
    }

    #[test]
    fn descriptor_errors() {
        assert!(KineticModel::from_json(r#"{"n_species":2,"k_i":[1],"transmission_variant":"linear"}"#).is_err());
        assert!(KineticModel::from_json(r#"{"n_species":1,"k_i":[1],"transmission_variant":"cubic"}"#).is_err());
        assert!(KineticModel::from_json(r#"{"n_species":1,"k_i":[-1],"transmission_variant":"linear"}"#).is_err());
        assert!(KineticModel::from_json(r#"{"n_species":1,"k_i":[1],"transmission_variant":"linear","u_ref_plus":[0]}"#).is_err());
    }

    #[test]
    fn zero_powers_are_one() {
        let m = model(r#"{"n_species":2,"alpha":[1,0],"beta":[0,1],"k_plus":1,"k_i":[0,0],"transmission_variant":"linear"}"#);
        assert_eq!(m.reaction_rate(Side::Plus, &[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(m.reaction_rate(Side::Plus, &[0.0, 3.0]), vec![3.0, -3.0]);
    }
}
