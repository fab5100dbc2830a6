use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::profile::{cutoff, cutoff_d1, CUTOFF_D1_MAX};

/// Logarithmic truncation of the total density: 1 up to `E`, 0 beyond `E^N`,
/// and `cutoff((ln r - ln E) / ((N - 1) ln E))` in between.
///
/// The same construction serves the paired densities (length `2n`) and a
/// single compartment (length `n`); only the argument length differs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyTruncation {
    pub e: f64,
    pub n: f64,
}

/// Which band of the truncation a total density falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TruncationRegion {
    Plateau,
    Transition,
    Vanishing,
}

impl EntropyTruncation {
    pub fn new(e: f64, n: f64) -> Result<Self> {
        if !(e >= 2.0) || !e.is_finite() {
            return config(format!("truncation level E must be at least 2, got {e}"));
        }
        if !(n >= 2.0) || !n.is_finite() {
            return config(format!("truncation exponent N must be at least 2, got {n}"));
        }
        Ok(EntropyTruncation { e, n })
    }

    /// `E = max(16, 8 n max U)`, `N = 4`.
    pub fn default_for(n_species: usize, max_reference: f64) -> Self {
        EntropyTruncation { e: (8.0 * n_species as f64 * max_reference).max(16.0), n: 4.0 }
    }

    fn log_span(&self) -> f64 {
        (self.n - 1.0) * self.e.ln()
    }

    pub fn region(&self, total: f64) -> TruncationRegion {
        if total <= self.e {
            TruncationRegion::Plateau
        } else if total.ln() >= self.n * self.e.ln() {
            TruncationRegion::Vanishing
        } else {
            TruncationRegion::Transition
        }
    }

    /// Profile applied to the total density.
    pub fn of_total(&self, total: f64) -> f64 {
        match self.region(total) {
            TruncationRegion::Plateau => 1.0,
            TruncationRegion::Vanishing => 0.0,
            TruncationRegion::Transition => cutoff((total.ln() - self.e.ln()) / self.log_span()),
        }
    }

    /// Derivative of [`Self::of_total`] with respect to the total.
    pub fn of_total_d1(&self, total: f64) -> f64 {
        match self.region(total) {
            TruncationRegion::Transition => {
                cutoff_d1((total.ln() - self.e.ln()) / self.log_span()) / (total * self.log_span())
            }
            _ => 0.0,
        }
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        self.of_total(u.iter().sum())
    }

    /// Every component of the gradient equals the derivative in the total.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        vec![self.of_total_d1(u.iter().sum()); u.len()]
    }

    /// Analytic bound on `sup |u|_1 |D xi*(u)|` for arguments of length `dim`.
    pub fn decay_bound(&self, dim: usize) -> f64 {
        (dim as f64).sqrt() * CUTOFF_D1_MAX / self.log_span()
    }

    /// Sampled `sup |u|_1 |D xi*(u)|` over the transition band.
    pub fn measured_decay(&self, dim: usize, samples: usize) -> f64 {
        let (a, b) = (self.e.ln(), self.n * self.e.ln());
        (1..samples)
            .map(|k| {
                let total = (a + (b - a) * k as f64 / samples as f64).exp();
                total * self.of_total_d1(total).abs() * (dim as f64).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn regions() {
        let t = EntropyTruncation::new(16.0, 4.0).unwrap();
        let u = [2.0, 2.0, 2.0, 2.0];
        assert_eq!(t.value(&u), 1.0);
        assert_eq!(t.gradient(&u), vec![0.0; 4]);
        let big = 16f64.powi(5);
        assert_eq!(t.value(&[big, 0.0]), 0.0);
        assert!(t.value(&[16.0 * 1.01]) < 1.0);
        assert!(EntropyTruncation::new(1.5, 4.0).is_err());
        assert!(EntropyTruncation::new(16.0, 1.0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let t = EntropyTruncation::new(4.0, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let total = (rng.random_range(4f64.ln()..3.0 * 4f64.ln())).exp();
            let w: Vec<f64> = (0..4).map(|_| rng.random_range(0.1..1.0)).collect();
            let s: f64 = w.iter().sum();
            let u: Vec<f64> = w.iter().map(|x| x * total / s).collect();
            let g = t.gradient(&u);
            for k in 0..4 {
                let step = 1e-6 * total;
                let mut a = u.clone();
                let mut b = u.clone();
                a[k] += step;
                b[k] -= step;
                let fd = (t.value(&a) - t.value(&b)) / (2.0 * step);
                assert!((fd - g[k]).abs() < 1e-6, "{fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn decay_scales_inversely_with_exponent() {
        let m: Vec<f64> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&n| EntropyTruncation::new(16.0, n).unwrap().measured_decay(4, 4000))
            .collect();
        for w in m.windows(2) {
            let r = w[0] / w[1];
            assert!(r > 1.0 && r < 4.0, "ratio {r}");
        }
        let t = EntropyTruncation::new(16.0, 4.0).unwrap();
        assert!(t.measured_decay(4, 4000) <= t.decay_bound(4) * (1.0 + 1e-12));
    }

    #[test]
    fn default_levels() {
        let t = EntropyTruncation::default_for(2, 3.0);
        assert_eq!(t.e, 48.0);
        assert_eq!(EntropyTruncation::default_for(1, 0.5).e, 16.0);
    }
}
