//! Smooth partition of unity subordinate to the anchor discs.

use super::polygon::dist;
use super::{Geometry, Point};
use crate::error::{Error, Result};
use crate::profile::cutoff;

/// Radial bump: 1 on the inner half of the disc, quintic decay to 0 at the rim.
fn bump(r: f64, radius: f64) -> f64 {
    cutoff(2.0 * r / radius - 1.0)
}

/// Weights for each anchor plus the outer weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PouValues {
    pub outer: f64,
    pub anchors: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub anchors: Vec<Point>,
    pub radii: Vec<f64>,
    interface: Vec<[Point; 2]>,
    width: f64,
}

impl PartitionOfUnity {
    /// Fails with the uncovered interface samples when the plateaus of the
    /// bumps do not cover the interface.
    pub fn new(geometry: &Geometry, anchors: Vec<Point>, radii: Vec<f64>) -> Result<Self> {
        if anchors.is_empty() || anchors.len() != radii.len() {
            return Err(Error::Config("need one radius per anchor and at least one anchor".into()));
        }
        if radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::Config("radii must be positive".into()));
        }
        let uncovered: Vec<Point> = geometry
            .interface_samples(1000)
            .into_iter()
            .chain(geometry.interface_endpoints())
            .filter(|z| !anchors.iter().zip(&radii).any(|(a, r)| dist(*z, *a) <= 0.5 * r))
            .collect();
        if !uncovered.is_empty() {
            return Err(Error::Coverage { uncovered });
        }
        let width = 0.5 * radii.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(PartitionOfUnity { anchors, radii, interface: geometry.interface.clone(), width })
    }

    /// Evenly spaced anchors along each interface segment, including endpoints.
    pub fn uniform(geometry: &Geometry, per_segment: usize, radius: f64) -> Result<Self> {
        let mut anchors: Vec<Point> = Vec::new();
        for seg in &geometry.interface {
            for k in 0..per_segment {
                let t = k as f64 / (per_segment - 1).max(1) as f64;
                let p = [seg[0][0] + t * (seg[1][0] - seg[0][0]), seg[0][1] + t * (seg[1][1] - seg[0][1])];
                if !anchors.iter().any(|a| dist(*a, p) < 1e-12) {
                    anchors.push(p);
                }
            }
        }
        let radii = vec![radius; anchors.len()];
        PartitionOfUnity::new(geometry, anchors, radii)
    }

    fn interface_distance(&self, x: Point) -> f64 {
        self.interface
            .iter()
            .map(|s| super::polygon::segment_distance(x, s[0], s[1]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, x: Point) -> PouValues {
        let raw: Vec<f64> = self.anchors.iter().zip(&self.radii).map(|(a, r)| bump(dist(x, *a), *r)).collect();
        let outer_raw = 1.0 - cutoff(self.interface_distance(x) / self.width);
        let total = outer_raw + raw.iter().sum::<f64>();
        PouValues { outer: outer_raw / total, anchors: raw.into_iter().map(|b| b / total).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_to_one_and_vanishes_outside_on_interface() {
        let g = Geometry::flat_symmetric();
        let pou = PartitionOfUnity::uniform(&g, 5, 0.6).unwrap();
        for k in 0..=50 {
            let z = [0.0, k as f64 / 50.0];
            let v = pou.eval(z);
            assert_eq!(v.outer, 0.0);
            assert!((v.anchors.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
        let far = pou.eval([0.9, 0.5]);
        assert_eq!(far.outer, 1.0);
    }

    #[test]
    fn sparse_anchors_report_coverage_gaps() {
        let g = Geometry::flat_symmetric();
        let err = PartitionOfUnity::new(&g, vec![[0.0, 0.0], [0.0, 1.0]], vec![0.4, 0.4]).unwrap_err();
        match err {
            Error::Coverage { uncovered } => {
                assert!(!uncovered.is_empty());
                assert!(uncovered.iter().all(|z| z[1] > 0.2 - 1e-9 && z[1] < 0.8 + 1e-9));
            }
            other => panic!("unexpected {other}"),
        }
    }
}
