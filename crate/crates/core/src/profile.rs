//! Quintic smoothstep profiles shared by the cutoffs and truncations.

/// `S(s) = 6s^5 - 15s^4 + 10s^3` clamped to `[0, 1]`.
pub fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        s * s * s * (s * (6.0 * s - 15.0) + 10.0)
    }
}

pub fn smoothstep_d1(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        30.0 * s * s * (1.0 - s) * (1.0 - s)
    }
}

pub fn smoothstep_d2(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        60.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
    }
}

/// Decreasing cutoff: 1 on `(-inf, 0]`, 0 on `[1, inf)`.
pub fn cutoff(s: f64) -> f64 {
    1.0 - smoothstep(s)
}

pub fn cutoff_d1(s: f64) -> f64 {
    -smoothstep_d1(s)
}

pub fn cutoff_d2(s: f64) -> f64 {
    -smoothstep_d2(s)
}

/// Largest value of `|cutoff'|`, attained at `s = 1/2`.
pub const CUTOFF_D1_MAX: f64 = 1.875;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_symmetry() {
        assert_eq!(cutoff(-1.0), 1.0);
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(1.0), 0.0);
        assert!((cutoff(0.5) - 0.5).abs() < 1e-15);
        assert!((cutoff_d1(0.5).abs() - CUTOFF_D1_MAX).abs() < 1e-15);
        for k in 1..20 {
            let s = k as f64 / 20.0;
            assert!((cutoff(s) + cutoff(1.0 - s) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-6;
        for k in 1..40 {
            let s = k as f64 / 40.0;
            let d1 = (smoothstep(s + h) - smoothstep(s - h)) / (2.0 * h);
            let d2 = (smoothstep_d1(s + h) - smoothstep_d1(s - h)) / (2.0 * h);
            assert!((d1 - smoothstep_d1(s)).abs() < 1e-8);
            assert!((d2 - smoothstep_d2(s)).abs() < 1e-6);
        }
    }
}
