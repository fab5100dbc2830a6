//! Rates recovered from cosh-type dual dissipation potentials, `u' = dR*(u, -Dh(u))`.

use super::{cosh_potential_derivative, BulkReaction, KineticModel, TransmissionModel};
use crate::error::{Error, Result};
use crate::geometry::Side;

fn log_bar(u: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    u.iter()
        .zip(r)
        .map(|(x, r)| {
            if *x > 0.0 {
                Ok((x / r).ln())
            } else {
                Err(Error::Domain(format!("gradient structure needs positive densities, got {x}")))
            }
        })
        .collect()
}

/// Bulk rate `kappa(u) c'((alpha - beta) . (-Dh)) (alpha - beta)` with
/// `kappa = k prod ubar^((alpha + beta)/2)`.
pub fn rate_from_gradient_structure(model: &KineticModel, side: Side, u: &[f64]) -> Result<Vec<f64>> {
    let lb = log_bar(u, &model.u_ref[side.index()])?;
    match &model.bulk {
        BulkReaction::MassAction { alpha, beta, k } => {
            let k = k[side.index()];
            let lambda: Vec<f64> = alpha.iter().zip(beta).map(|(a, b)| *a as f64 - *b as f64).collect();
            let log_kappa: f64 =
                lb.iter().zip(alpha.iter().zip(beta)).map(|(l, (a, b))| 0.5 * (*a + *b) as f64 * l).sum();
            let force: f64 = -lambda.iter().zip(&lb).map(|(l, x)| l * x).sum::<f64>();
            let s = k * log_kappa.exp() * cosh_potential_derivative(force);
            Ok(lambda.iter().map(|l| s * l).collect())
        }
        BulkReaction::LogGrowth { .. } => {
            Err(Error::Domain("the log-growth control has no gradient structure".into()))
        }
    }
}

/// Interface outflow `r+ = -sum_l kappa_l c'(lambda_l . [[-Dh]]) lambda_l` where
/// `[[.]]` is the plus trace minus the minus trace.
pub fn interface_rate_from_gradient_structure(model: &KineticModel, plus: &[f64], minus: &[f64]) -> Result<Vec<f64>> {
    let n = model.n_species;
    let lp = log_bar(plus, &model.u_ref[0])?;
    let lm = log_bar(minus, &model.u_ref[1])?;
    let jump: Vec<f64> = (0..n).map(|i| -(lp[i] - lm[i])).collect();
    let mut out = vec![0.0; n];
    let mut add_term = |lambda: &[f64], log_kappa: f64, k: f64| {
        if k == 0.0 {
            return;
        }
        let force: f64 = lambda.iter().zip(&jump).map(|(l, j)| l * j).sum();
        let s = k * log_kappa.exp() * cosh_potential_derivative(force);
        for (o, l) in out.iter_mut().zip(lambda) {
            *o -= s * l;
        }
    };
    match &model.transmission {
        TransmissionModel::Linear { k } => {
            for i in 0..n {
                let mut lambda = vec![0.0; n];
                lambda[i] = 1.0;
                add_term(&lambda, 0.5 * (lp[i] + lm[i]), k[i]);
            }
        }
        TransmissionModel::Polynomial { gamma, delta, k } => {
            let lambda: Vec<f64> = (0..n).map(|i| gamma[i] as f64 - delta[i] as f64).collect();
            let log_kappa: f64 = (0..n).map(|i| 0.5 * (gamma[i] + delta[i]) as f64 * (lp[i] + lm[i])).sum();
            add_term(&lambda, log_kappa, *k);
        }
        TransmissionModel::NonlinearCoefficient { gamma, k, form } => {
            let a: Vec<f64> = lp.iter().map(|x| x.exp()).collect();
            let b: Vec<f64> = lm.iter().map(|x| x.exp()).collect();
            for i in 0..n {
                let g = gamma[i] as f64;
                let mut lambda = vec![0.0; n];
                lambda[i] = g;
                add_term(&lambda, 0.5 * g * (lp[i] + lm[i]), form.eval(k[i], i, &a, &b) / g);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_mass_action_at_a_point() {
        let m = KineticModel::from_json(
            r#"{"n_species":2,"alpha":[2,0],"beta":[0,1],"k_plus":1.5,"k_i":[1,1],"transmission_variant":"linear"}"#,
        )
        .unwrap();
        let u = [0.7, 3.1];
        let direct = m.reaction_rate(Side::Plus, &u);
        let grad = rate_from_gradient_structure(&m, Side::Plus, &u).unwrap();
        for (a, b) in direct.iter().zip(&grad) {
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
        assert!(rate_from_gradient_structure(&m, Side::Plus, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn polynomial_interface_vanishes_at_equal_traces() {
        let m = KineticModel::from_json(
            r#"{"n_species":2,"gamma":[1,0],"delta":[0,1],"k_gamma":2,"transmission_variant":"polynomial"}"#,
        )
        .unwrap();
        let r = interface_rate_from_gradient_structure(&m, &[1.3, 0.4], &[1.3, 0.4]).unwrap();
        assert!(r.iter().all(|x| x.abs() < 1e-15));
    }
}
