//! Entropy densities, mass-action reactions, interface transmission laws and
//! their cosh-type gradient structure.

mod gradient;
mod model;
mod validate;

pub use gradient::{interface_rate_from_gradient_structure, rate_from_gradient_structure};
pub use model::{BulkReaction, CoefficientForm, KineticModel, ModelDescriptor, TransmissionModel};
pub use validate::{log_uniform, validate_hypotheses, validate_rates, HypothesisReport};

use crate::error::{Error, Result};

/// Floor applied inside logarithms when diagnostics meet zero densities.
pub const LOG_FLOOR: f64 = 1e-30;

/// `r log r - r`, plus 1 when `shifted`, with `0 log 0 = 0`.
pub fn boltzmann(r: f64, shifted: bool) -> Result<f64> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::Domain(format!("entropy argument must be nonnegative, got {r}")));
    }
    let base = if r == 0.0 { 0.0 } else { r * r.ln() - r };
    Ok(if shifted { base + 1.0 } else { base })
}

/// `x ln(x / y) - x + y` for `x >= 0`, `y > 0`, evaluated without cancellation near `x = y`.
pub fn relative_boltzmann(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        return y;
    }
    let q = x / y;
    let d = q - 1.0;
    if d.abs() < 0.1 {
        // q ln q - q + 1 = sum_{k>=2} (-d)^k / (k (k-1))
        let mut term = d * d;
        let mut sum = 0.0;
        for k in 2..24 {
            sum += term / (k * (k - 1)) as f64;
            term *= -d;
        }
        y * sum
    } else {
        x * q.ln() - x + y
    }
}

/// Entropy of one compartment, `sum_i u_ref_i * B(u_i / u_ref_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyDensity {
    pub u_ref: Vec<f64>,
    pub shifted: bool,
}

impl EntropyDensity {
    pub fn unit(n: usize, shifted: bool) -> Self {
        EntropyDensity { u_ref: vec![1.0; n], shifted }
    }

    pub fn value(&self, u: &[f64]) -> Result<f64> {
        let mut h = 0.0;
        for (ui, r) in u.iter().zip(&self.u_ref) {
            h += r * boltzmann(ui / r, self.shifted)?;
        }
        Ok(h)
    }

    /// `log(u_i / u_ref_i)`; requires positive densities.
    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        u.iter()
            .zip(&self.u_ref)
            .map(|(ui, r)| {
                if *ui > 0.0 {
                    Ok((ui / r).ln())
                } else {
                    Err(Error::Domain(format!("entropy gradient needs positive densities, got {ui}")))
                }
            })
            .collect()
    }

    /// Gradient with densities floored at [`LOG_FLOOR`].
    pub fn gradient_floored(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.u_ref).map(|(ui, r)| (ui.max(LOG_FLOOR) / r).ln()).collect()
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("epsilon must lie in (0, 1], got {eps}")))
    }
}

/// `f / (1 + eps |f|)` with the Euclidean norm of the whole vector.
pub fn regularize(rate: &[f64], eps: f64) -> Result<Vec<f64>> {
    check_epsilon(eps)?;
    Ok(regularize_unchecked(rate, eps))
}

pub(crate) fn regularize_unchecked(rate: &[f64], eps: f64) -> Vec<f64> {
    let norm = rate.iter().map(|x| x * x).sum::<f64>().sqrt();
    let d = 1.0 + eps * norm;
    rate.iter().map(|x| x / d).collect()
}

/// `min(u, 1/eps)` componentwise.
pub fn clip_initial_data(u: &[f64], eps: f64) -> Result<Vec<f64>> {
    check_epsilon(eps)?;
    Ok(u.iter().map(|x| x.min(1.0 / eps)).collect())
}

/// `4 (cosh(r/2) - 1)`.
pub fn cosh_potential(r: f64) -> f64 {
    // same value as 4 (cosh(r/2) - 1) without cancellation near 0
    let q = (0.25 * r).sinh();
    8.0 * q * q
}

/// `2 sinh(r/2)`.
pub fn cosh_potential_derivative(r: f64) -> f64 {
    2.0 * (0.5 * r).sinh()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boltzmann_values() {
        assert_eq!(boltzmann(1.0, false).unwrap(), -1.0);
        assert!(boltzmann(std::f64::consts::E, false).unwrap().abs() < 1e-15);
        assert_eq!(boltzmann(0.0, false).unwrap(), 0.0);
        assert_eq!(boltzmann(0.0, true).unwrap(), 1.0);
        assert_eq!(boltzmann(1.0, true).unwrap(), 0.0);
        assert!(boltzmann(-0.1, true).is_err());
    }

    #[test]
    fn gradient_values_and_domain() {
        let h = EntropyDensity::unit(2, true);
        let g = h.gradient(&[2.0, 4.0]).unwrap();
        assert_eq!(g, vec![2f64.ln(), 4f64.ln()]);
        assert!(h.gradient(&[0.0, 1.0]).is_err());
        assert!(h.gradient(&[-1.0, 1.0]).is_err());
    }

    #[test]
    fn regularize_examples() {
        assert_eq!(regularize(&[10.0], 0.1).unwrap(), vec![5.0]);
        let f = [3.0, -4.0];
        let mut last = f64::INFINITY;
        for eps in [1.0, 0.5, 0.25] {
            let g = regularize(&f, eps).unwrap();
            let gap = g.iter().zip(&f).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(gap < last);
            last = gap;
            assert!(g[0] > 0.0 && g[1] < 0.0);
            assert!(g.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1.0 / eps);
        }
        assert!(regularize(&f, 0.0).is_err());
        assert!(regularize(&f, 1.5).is_err());
    }

    #[test]
    fn clipping() {
        assert_eq!(clip_initial_data(&[100.0, 3.0], 0.05).unwrap(), vec![20.0, 3.0]);
    }

    #[test]
    fn cosh_potential_values() {
        assert_eq!(cosh_potential(0.0), 0.0);
        assert!((cosh_potential(2.0) - 4.0 * (1f64.cosh() - 1.0)).abs() < 1e-14);
        assert!((cosh_potential_derivative(4f64.ln()) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn relative_boltzmann_is_stable() {
        assert_eq!(relative_boltzmann(2.0, 2.0), 0.0);
        assert_eq!(relative_boltzmann(0.0, 3.0), 3.0);
        let x = 1.0 + 1e-9;
        let d = x - 1.0;
        let exact = 0.5 * d * d - d * d * d / 6.0;
        assert!((relative_boltzmann(x, 1.0) - exact).abs() < 1e-27);
        let direct = 5.0 * (5.0f64 / 2.0).ln() - 5.0 + 2.0;
        assert!((relative_boltzmann(5.0, 2.0) - direct).abs() < 1e-14);
    }
}
