use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::profile::{cutoff, cutoff_d1, cutoff_d2};

/// Smoothed coordinate projection `xi_j(u) = (u_j - 3E) w(sum u / E - 1) + 3E`
/// with `w` the quintic cutoff: equal to `u_j` while `sum u <= E`, constant
/// `3E` once `sum u >= 2E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionTruncation {
    pub e: f64,
    pub dim: usize,
}

/// Value, gradient and Hessian (row-major `dim x dim`) of one component.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<f64>,
}

impl ProjectionTruncation {
    pub fn new(e: f64, dim: usize) -> Result<Self> {
        if !(e >= 1.0) || !e.is_finite() {
            return config(format!("projection level must be at least 1, got {e}"));
        }
        if dim == 0 {
            return config("projection needs at least one variable");
        }
        Ok(ProjectionTruncation { e, dim })
    }

    fn check(&self, j: usize, u: &[f64]) -> Result<()> {
        if j >= self.dim {
            return Err(Error::Config(format!("component {j} out of range for {} variables", self.dim)));
        }
        if u.len() != self.dim {
            return Err(Error::Config(format!("expected {} variables, got {}", self.dim, u.len())));
        }
        Ok(())
    }

    fn arg(&self, u: &[f64]) -> f64 {
        u.iter().sum::<f64>() / self.e - 1.0
    }

    pub fn value(&self, j: usize, u: &[f64]) -> f64 {
        let w = cutoff(self.arg(u));
        // keep the plateau and the cap exact
        if w == 1.0 {
            u[j]
        } else if w == 0.0 {
            3.0 * self.e
        } else {
            (u[j] - 3.0 * self.e) * w + 3.0 * self.e
        }
    }

    /// `D_i xi_j = delta_ij w + (u_j - 3E) w' / E`, written into `out`.
    pub fn gradient_into(&self, j: usize, u: &[f64], out: &mut [f64]) {
        let s = self.arg(u);
        let w = cutoff(s);
        let dw = cutoff_d1(s) / self.e;
        let common = (u[j] - 3.0 * self.e) * dw;
        for (i, o) in out.iter_mut().enumerate() {
            *o = common + if i == j { w } else { 0.0 };
        }
    }

    pub fn jet(&self, j: usize, u: &[f64]) -> Result<Jet> {
        self.check(j, u)?;
        let d = self.dim;
        let s = self.arg(u);
        let dw = cutoff_d1(s) / self.e;
        let ddw = cutoff_d2(s) / (self.e * self.e);
        let mut gradient = vec![0.0; d];
        self.gradient_into(j, u, &mut gradient);
        let mut hessian = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let mut h = (u[j] - 3.0 * self.e) * ddw;
                if i == j {
                    h += dw;
                }
                if k == j {
                    h += dw;
                }
                hessian[i * d + k] = h;
            }
        }
        Ok(Jet { value: self.value(j, u), gradient, hessian })
    }
}

/// Measured constants of the projection family for one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMeasure {
    pub e: f64,
    /// `sup sqrt(u_i u_k) |D_i D_k xi_j|` on samples scaled with `E`.
    pub weighted_hessian: f64,
    /// `sup |D_i xi_j|` on samples scaled with `E`.
    pub gradient: f64,
    /// `max |D_i xi_j - delta_ij|` on the fixed samples.
    pub gradient_limit_gap: f64,
    /// `sup |D_i D_k xi_j|` on the fixed samples with `|u|_1 <= K`.
    pub hessian_on_ball: f64,
}

/// Outcome of the property checks over a sequence of levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub levels: Vec<LevelMeasure>,
    /// Largest `|xi_j(u) - u_j|` over samples with `sum u <= E`.
    pub identity_below_level: f64,
    /// Largest `|xi_i(u) - u_i|` over samples with `sum_j xi_j(u) <= E`.
    pub identity_below_image: f64,
    /// Samples for which the image condition held.
    pub image_samples: usize,
    /// Largest `|D xi_j|` over samples with `sum u >= 2E`.
    pub gradient_outside_support: f64,
    /// Largest finite-difference mismatch of gradient and Hessian in the transition band.
    pub derivative_mismatch: f64,
    /// `max / min` of the two uniform bounds across levels.
    pub weighted_hessian_growth: f64,
    pub gradient_growth: f64,
    pub gradient_limit_monotone: bool,
    pub hessian_limit_monotone: bool,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.identity_below_level == 0.0
            && self.identity_below_image == 0.0
            && self.gradient_outside_support == 0.0
            && self.derivative_mismatch <= 1e-6
            && self.weighted_hessian_growth < 1.5
            && self.gradient_growth < 1.5
            && self.gradient_limit_monotone
            && self.hessian_limit_monotone
    }
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0]) && v.last() < v.first()
}

/// Checks the projection family on `dim` variables along an increasing sequence of levels.
pub fn verify_projection_properties(dim: usize, levels: &[f64], budget: usize, seed: u64) -> Result<PropertyReport> {
    if levels.len() < 3 || levels.windows(2).any(|w| !(w[1] > w[0])) {
        return config("need an increasing sequence of at least three levels");
    }
    if budget < 10 {
        return config("sample budget must be at least 10");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // directions on the simplex, scaled per use
    let shapes: Vec<Vec<f64>> = (0..budget)
        .map(|_| {
            let w: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
            let s: f64 = w.iter().sum::<f64>().max(1e-12);
            w.into_iter().map(|x| x / s).collect()
        })
        .collect();
    let totals: Vec<f64> = (0..budget).map(|_| rng.random_range(0.0..3.0)).collect();
    let ball = 8.0;
    let fixed: Vec<Vec<f64>> = shapes
        .iter()
        .zip(&totals)
        .map(|(s, t)| s.iter().map(|x| x * t / 3.0 * ball).collect())
        .collect();

    let mut measures = Vec::with_capacity(levels.len());
    let mut grad = vec![0.0; dim];
    for &e in levels {
        let p = ProjectionTruncation::new(e, dim)?;
        let mut m = LevelMeasure { e, weighted_hessian: 0.0, gradient: 0.0, gradient_limit_gap: 0.0, hessian_on_ball: 0.0 };
        for (s, t) in shapes.iter().zip(&totals) {
            let u: Vec<f64> = s.iter().map(|x| x * t * e).collect();
            for j in 0..dim {
                let jet = p.jet(j, &u)?;
                for i in 0..dim {
                    m.gradient = m.gradient.max(jet.gradient[i].abs());
                    for k in 0..dim {
                        m.weighted_hessian =
                            m.weighted_hessian.max((u[i] * u[k]).sqrt() * jet.hessian[i * dim + k].abs());
                    }
                }
            }
        }
        for u in &fixed {
            for j in 0..dim {
                let jet = p.jet(j, u)?;
                for i in 0..dim {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    m.gradient_limit_gap = m.gradient_limit_gap.max((jet.gradient[i] - delta).abs());
                    for k in 0..dim {
                        m.hessian_on_ball = m.hessian_on_ball.max(jet.hessian[i * dim + k].abs());
                    }
                }
            }
        }
        measures.push(m);
    }

    let mut identity_below_level: f64 = 0.0;
    let mut identity_below_image: f64 = 0.0;
    let mut image_samples = 0;
    let mut gradient_outside_support: f64 = 0.0;
    let mut derivative_mismatch: f64 = 0.0;
    for &e in levels {
        let p = ProjectionTruncation::new(e, dim)?;
        for (s, t) in shapes.iter().zip(&totals) {
            // totals in [0, 3) E cover all three regimes
            let u: Vec<f64> = s.iter().map(|x| x * t * e).collect();
            let sum: f64 = u.iter().sum();
            let xi: Vec<f64> = (0..dim).map(|j| p.value(j, &u)).collect();
            if sum <= e {
                for j in 0..dim {
                    identity_below_level = identity_below_level.max((xi[j] - u[j]).abs());
                }
            }
            if xi.iter().sum::<f64>() <= e {
                image_samples += 1;
                for j in 0..dim {
                    identity_below_image = identity_below_image.max((xi[j] - u[j]).abs());
                }
            }
            if sum >= 2.0 * e {
                for j in 0..dim {
                    p.gradient_into(j, &u, &mut grad);
                    gradient_outside_support = grad.iter().fold(gradient_outside_support, |a, g| a.max(g.abs()));
                }
            }
        }
        // finite differences inside the transition band
        for s in shapes.iter().take(100) {
            let t = 1.1 + 0.8 * s[0];
            let u: Vec<f64> = s.iter().map(|x| x * t * e).collect();
            let step = 1e-5 * e;
            for j in 0..dim {
                let jet = p.jet(j, &u)?;
                for i in 0..dim {
                    let mut a = u.clone();
                    let mut b = u.clone();
                    a[i] += step;
                    b[i] -= step;
                    let fd = (p.value(j, &a) - p.value(j, &b)) / (2.0 * step);
                    derivative_mismatch = derivative_mismatch.max((fd - jet.gradient[i]).abs());
                    let (ga, gb) = (p.jet(j, &a)?.gradient, p.jet(j, &b)?.gradient);
                    for k in 0..dim {
                        let fd2 = (ga[k] - gb[k]) / (2.0 * step);
                        derivative_mismatch = derivative_mismatch.max((fd2 - jet.hessian[i * dim + k]).abs() * e);
                    }
                }
            }
        }
    }

    let growth = |f: fn(&LevelMeasure) -> f64| {
        let v: Vec<f64> = measures.iter().map(f).collect();
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    };
    let gaps: Vec<f64> = measures.iter().map(|m| m.gradient_limit_gap).collect();
    let hess: Vec<f64> = measures.iter().map(|m| m.hessian_on_ball).collect();
    Ok(PropertyReport {
        weighted_hessian_growth: growth(|m| m.weighted_hessian),
        gradient_growth: growth(|m| m.gradient),
        gradient_limit_monotone: non_increasing(&gaps),
        hessian_limit_monotone: non_increasing(&hess),
        levels: measures,
        identity_below_level,
        identity_below_image,
        image_samples,
        gradient_outside_support,
        derivative_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn below_level_is_the_coordinate() {
        let p = ProjectionTruncation::new(4.0, 4).unwrap();
        let u = [0.5, 1.0, 0.25, 0.25];
        let jet = p.jet(1, &u).unwrap();
        assert_eq!(jet.value, 1.0);
        assert_eq!(jet.gradient, vec![0.0, 1.0, 0.0, 0.0]);
        assert!(jet.hessian.iter().all(|h| *h == 0.0));
    }

    #[test]
    fn above_twice_the_level_is_constant() {
        let p = ProjectionTruncation::new(2.0, 2).unwrap();
        let jet = p.jet(0, &[3.0, 1.5]).unwrap();
        assert_eq!(jet.value, 6.0);
        assert_eq!(jet.gradient, vec![0.0, 0.0]);
    }

    #[test]
    fn index_and_level_are_checked() {
        let p = ProjectionTruncation::new(2.0, 2).unwrap();
        assert!(p.jet(2, &[0.0, 0.0]).is_err());
        assert!(ProjectionTruncation::new(0.5, 2).is_err());
    }

    #[test]
    fn property_suite_passes() {
        let r = verify_projection_properties(4, &[4.0, 16.0, 64.0], 2000, 11).unwrap();
        assert!(r.passed(), "{r:#?}");
        assert!(r.image_samples > 0);
    }
}
