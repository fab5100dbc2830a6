//! Two-compartment planar geometries, meshes, local reflections and the
//! interface partition of unity.

mod mesh;
mod partition;
pub mod polygon;
mod reflection;

pub use mesh::{BoundaryFace, Cell, Face, InterfaceFace, Mesh};
pub use partition::{PartitionOfUnity, PouValues};
pub use polygon::Polygon;
pub use reflection::{
    extend_field, reflection_map, reflection_map_with_frame, ExtendedField, Frame, MapKind,
    PiecewiseLinear, ReflectionMap, ReflectionPartners, ReflectionReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use polygon::{dot, interiors_overlap, segment_distance, sub};

pub type Point = [f64; 2];

/// Compartment label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Plus => 0,
            Side::Minus => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }

    pub const BOTH: [Side; 2] = [Side::Plus, Side::Minus];
}

/// Straight separating line through `point`; `normal` points towards the plus side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatingLine {
    pub point: Point,
    pub normal: Point,
}

impl SeparatingLine {
    pub fn new(point: Point, normal: Point) -> Self {
        let len = polygon::norm(normal);
        SeparatingLine { point, normal: [normal[0] / len, normal[1] / len] }
    }

    pub fn signed_distance(&self, x: Point) -> f64 {
        dot(sub(x, self.point), self.normal)
    }

    pub fn reflect(&self, x: Point) -> Point {
        let d = self.signed_distance(x);
        [x[0] - 2.0 * d * self.normal[0], x[1] - 2.0 * d * self.normal[1]]
    }
}

/// User-supplied frame for an anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub anchor: Point,
    pub axis: Point,
}

/// JSON description of a geometry: either a named template or explicit polygons.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface: Option<Vec<[Point; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separating_line: Option<SeparatingLine>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frames: Vec<FrameSpec>,
}

impl GeometryDescriptor {
    pub fn template(name: &str) -> Self {
        GeometryDescriptor { template: Some(name.to_string()), ..Default::default() }
    }
}

/// A validated two-compartment geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub plus: Polygon,
    pub minus: Polygon,
    pub interface: Vec<[Point; 2]>,
    pub line: SeparatingLine,
    pub frames: Vec<FrameSpec>,
    pub name: String,
}

impl Geometry {
    pub fn flat_symmetric() -> Self {
        Geometry::build(&GeometryDescriptor::template("flat_symmetric")).expect("template is valid")
    }

    pub fn triple_junction() -> Self {
        Geometry::build(&GeometryDescriptor::template("triple_junction")).expect("template is valid")
    }

    pub fn build(desc: &GeometryDescriptor) -> Result<Geometry> {
        let mut geom = match desc.template.as_deref() {
            Some("flat_symmetric") => Geometry {
                plus: Polygon::rect(0.0, 0.0, 1.0, 1.0),
                minus: Polygon::rect(-1.0, 0.0, 0.0, 1.0),
                interface: vec![[[0.0, 0.0], [0.0, 1.0]]],
                line: SeparatingLine::new([0.0, 0.0], [1.0, 0.0]),
                frames: Vec::new(),
                name: "flat_symmetric".into(),
            },
            Some("triple_junction") => Geometry {
                plus: Polygon::rect(0.0, 0.0, 1.0, 1.0),
                minus: Polygon::rect(-1.0, 0.0, 0.0, 1.0),
                interface: vec![[[0.0, 0.0], [0.0, 0.5]]],
                line: SeparatingLine::new([0.0, 0.0], [1.0, 0.0]),
                frames: Vec::new(),
                name: "triple_junction".into(),
            },
            Some(other) => {
                return Err(Error::Geometry(format!("unknown template `{other}`")));
            }
            None => {
                let missing = |what: &str| Error::Geometry(format!("missing `{what}`"));
                Geometry {
                    plus: Polygon::new(desc.plus.clone().ok_or_else(|| missing("plus"))?),
                    minus: Polygon::new(desc.minus.clone().ok_or_else(|| missing("minus"))?),
                    interface: desc.interface.clone().ok_or_else(|| missing("interface"))?,
                    line: desc.separating_line.ok_or_else(|| missing("separating_line"))?,
                    frames: Vec::new(),
                    name: "custom".into(),
                }
            }
        };
        if desc.template.is_some()
            && (desc.plus.is_some() || desc.minus.is_some() || desc.interface.is_some())
        {
            return Err(Error::Geometry("a template cannot be combined with explicit polygons".into()));
        }
        if let Some(line) = desc.separating_line {
            if desc.template.is_none() {
                geom.line = SeparatingLine::new(line.point, line.normal);
            }
        }
        geom.frames = desc.frames.clone();
        geom.validate()?;
        Ok(geom)
    }

    /// Structural checks: disjoint compartments, shared interface, separation.
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("plus", &self.plus), ("minus", &self.minus)] {
            if p.vertices.len() < 3 || p.area() <= 0.0 {
                return Err(Error::Geometry(format!("compartment `{name}` is degenerate")));
            }
        }
        if interiors_overlap(&self.plus, &self.minus) {
            return Err(Error::Geometry("compartments overlap".into()));
        }
        if self.interface.is_empty() {
            return Err(Error::Geometry("interface is empty".into()));
        }
        let scale = self.plus.diameter().max(self.minus.diameter());
        let tol = 1e-12 * scale.max(1.0);
        for seg in &self.interface {
            if polygon::dist(seg[0], seg[1]) <= tol {
                return Err(Error::Geometry("interface segment has zero length".into()));
            }
            for k in 0..=16 {
                let t = k as f64 / 16.0;
                let x = [seg[0][0] + t * (seg[1][0] - seg[0][0]), seg[0][1] + t * (seg[1][1] - seg[0][1])];
                if self.plus.boundary_distance(x) > tol || self.minus.boundary_distance(x) > tol {
                    return Err(Error::Geometry(format!(
                        "interface point {x:?} is not on the boundary of both compartments"
                    )));
                }
                if self.line.signed_distance(x).abs() > tol {
                    return Err(Error::Geometry(format!(
                        "interface point {x:?} is not on the separating line"
                    )));
                }
            }
        }
        let plus_ok = self.plus.vertices.iter().all(|v| self.line.signed_distance(*v) >= -tol);
        let minus_ok = self.minus.vertices.iter().all(|v| self.line.signed_distance(*v) <= tol);
        if !plus_ok || !minus_ok {
            return Err(Error::Geometry("separating line does not separate the compartments".into()));
        }
        Ok(())
    }

    pub fn polygon(&self, side: Side) -> &Polygon {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    pub fn interface_length(&self) -> f64 {
        self.interface.iter().map(|s| polygon::dist(s[0], s[1])).sum()
    }

    pub fn interface_distance(&self, x: Point) -> f64 {
        self.interface
            .iter()
            .map(|s| segment_distance(x, s[0], s[1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Endpoints of the interface segments that are not shared by two segments.
    pub fn interface_endpoints(&self) -> Vec<Point> {
        let mut ends = Vec::new();
        for (i, seg) in self.interface.iter().enumerate() {
            for e in seg {
                let shared = self
                    .interface
                    .iter()
                    .enumerate()
                    .any(|(j, o)| j != i && (polygon::dist(o[0], *e) < 1e-12 || polygon::dist(o[1], *e) < 1e-12));
                if !shared {
                    ends.push(*e);
                }
            }
        }
        ends
    }

    /// Side whose closed compartment contains `x`, preferring plus on the interface.
    pub fn locate(&self, x: Point, tol: f64) -> Option<Side> {
        if self.plus.contains_closed(x, tol) {
            Some(Side::Plus)
        } else if self.minus.contains_closed(x, tol) {
            Some(Side::Minus)
        } else {
            None
        }
    }

    /// Evenly spaced points along the interface, `per_segment` per segment.
    pub fn interface_samples(&self, per_segment: usize) -> Vec<Point> {
        let mut out = Vec::new();
        for seg in &self.interface {
            for k in 0..per_segment {
                let t = (k as f64 + 0.5) / per_segment as f64;
                out.push([seg[0][0] + t * (seg[1][0] - seg[0][0]), seg[0][1] + t * (seg[1][1] - seg[0][1])]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_validate() {
        let flat = Geometry::flat_symmetric();
        assert_eq!(flat.plus.area(), 1.0);
        assert_eq!(flat.minus.area(), 1.0);
        assert_eq!(flat.interface_length(), 1.0);
        let tj = Geometry::triple_junction();
        assert_eq!(tj.interface_length(), 0.5);
        let ends = tj.interface_endpoints();
        assert!(ends.contains(&[0.0, 0.0]) && ends.contains(&[0.0, 0.5]));
    }

    fn custom(plus: Polygon, minus: Polygon, iface: [Point; 2]) -> GeometryDescriptor {
        GeometryDescriptor {
            plus: Some(plus.vertices),
            minus: Some(minus.vertices),
            interface: Some(vec![iface]),
            separating_line: Some(SeparatingLine::new([0.0, 0.0], [1.0, 0.0])),
            ..Default::default()
        }
    }

    #[test]
    fn identical_compartments_are_rejected() {
        let sq = Polygon::rect(0.0, 0.0, 1.0, 1.0);
        let err = Geometry::build(&custom(sq.clone(), sq, [[0.0, 0.0], [0.0, 1.0]])).unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }

    #[test]
    fn interface_off_boundary_is_rejected() {
        let d = custom(
            Polygon::rect(0.0, 0.0, 1.0, 1.0),
            Polygon::rect(-1.0, 0.0, 0.0, 0.5),
            [[0.0, 0.0], [0.0, 1.0]],
        );
        assert!(Geometry::build(&d).is_err());
    }

    #[test]
    fn non_separating_line_is_rejected() {
        let mut d = custom(
            Polygon::rect(0.0, 0.0, 1.0, 1.0),
            Polygon::rect(-1.0, 0.0, 0.0, 1.0),
            [[0.0, 0.0], [0.0, 1.0]],
        );
        d.separating_line = Some(SeparatingLine::new([0.0, 0.0], [-1.0, 0.0]));
        assert!(Geometry::build(&d).is_err());
    }

    #[test]
    fn unknown_template_is_rejected() {
        assert!(Geometry::build(&GeometryDescriptor::template("annulus")).is_err());
    }

    #[test]
    fn reflection_across_line() {
        let l = SeparatingLine::new([0.0, 0.0], [1.0, 0.0]);
        assert_eq!(l.reflect([0.3, 0.7]), [-0.3, 0.7]);
    }
}
