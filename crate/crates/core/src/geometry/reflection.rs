//! Local measure-preserving reflections across the interface.
//!
//! Around an interior point of the interface the map is the plain mirror
//! image across the separating line. Around an endpoint the mirror image of
//! the minus compartment is sheared along a frame axis so that its boundary
//! lands on the boundary of the plus compartment. Both compartments are
//! written as hypographs `t < eta(y)` in frame coordinates and the shear
//! `(y, t) -> (y, t - eta_minus(y) + eta_plus(y))` has unit Jacobian.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::polygon::{add, dist, dot, norm, scale, sub, Polygon};
use super::{Geometry, Mesh, Point, SeparatingLine, Side};
use crate::error::{Error, Result};
use crate::field::StateField;

/// Continuous piecewise-linear function of one variable, extended linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(mut knots: Vec<(f64, f64)>) -> Self {
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        PiecewiseLinear { knots }
    }

    pub fn eval(&self, y: f64) -> f64 {
        let k = &self.knots;
        if k.len() == 1 {
            return k[0].1;
        }
        let mut i = k.partition_point(|p| p.0 <= y);
        i = i.clamp(1, k.len() - 1);
        let (y0, v0) = k[i - 1];
        let (y1, v1) = k[i];
        v0 + (y - y0) * (v1 - v0) / (y1 - y0)
    }

    pub fn shifted(&self, dv: f64) -> Self {
        PiecewiseLinear { knots: self.knots.iter().map(|&(y, v)| (y, v + dv)).collect() }
    }

    pub fn interior_knots(&self) -> Vec<f64> {
        if self.knots.len() < 3 {
            return Vec::new();
        }
        self.knots[1..self.knots.len() - 1].iter().map(|p| p.0).collect()
    }
}

/// Cone axis pointing from the anchor into both (reflected) compartments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub axis: Point,
}

impl Frame {
    pub fn new(axis: Point) -> Result<Frame> {
        let len = norm(axis);
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::Frame("frame axis must be a nonzero vector".into()));
        }
        Ok(Frame { axis: scale(axis, 1.0 / len) })
    }

    fn up(&self) -> Point {
        scale(self.axis, -1.0)
    }

    fn across(&self) -> Point {
        let m = self.up();
        [-m[1], m[0]]
    }

    fn local_coords(&self, anchor: Point, x: Point) -> (f64, f64) {
        let d = sub(x, anchor);
        (dot(d, self.across()), dot(d, self.up()))
    }

    fn global_point(&self, anchor: Point, y: f64, t: f64) -> Point {
        add(anchor, add(scale(self.across(), y), scale(self.up(), t)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    /// Mirror image across the separating line inside a disc.
    Flat,
    /// Mirror image followed by a hypograph shear.
    Hypograph { frame: Frame, eta_plus: PiecewiseLinear, eta_minus: PiecewiseLinear },
}

/// Involutive map of `(Omega_+ u Omega_-) n V` exchanging the compartments and fixing the interface.
#[derive(Debug, Clone)]
pub struct ReflectionMap {
    pub anchor: Point,
    pub radius: f64,
    pub line: SeparatingLine,
    pub kind: MapKind,
    plus: Polygon,
    minus: Polygon,
    interface: Vec<[Point; 2]>,
    tol: f64,
}

/// Worst-case defects measured by [`ReflectionMap::verify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionReport {
    pub involution: f64,
    pub det: f64,
    pub gamma_fixed: f64,
    pub boundary: f64,
    pub samples: usize,
    pub det_samples: usize,
}

impl ReflectionReport {
    pub fn worst(&self) -> f64 {
        self.involution.max(self.det).max(self.gamma_fixed).max(self.boundary)
    }
}

fn check_anchor(geometry: &Geometry, anchor: Point, radius: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    if geometry.interface_distance(anchor) > 1e-12 {
        return Err(Error::Domain(format!("anchor {anchor:?} is not on the interface")));
    }
    Ok(())
}

/// Map around `anchor`: mirror image in the interior of the interface, sheared
/// mirror image at its endpoints (with the geometry's frame if one is given).
pub fn reflection_map(geometry: &Geometry, anchor: Point, radius: f64) -> Result<ReflectionMap> {
    check_anchor(geometry, anchor, radius)?;
    let endpoint = geometry.interface_endpoints().into_iter().find(|e| dist(*e, anchor) < 1e-12);
    match endpoint {
        None => Ok(ReflectionMap::flat(geometry, anchor, radius)),
        Some(_) => {
            let frame = match geometry.frames.iter().find(|f| dist(f.anchor, anchor) < 1e-12) {
                Some(spec) => Frame::new(spec.axis)?,
                None => default_frame(geometry, anchor)?,
            };
            reflection_map_with_frame(geometry, anchor, radius, frame)
        }
    }
}

/// Sheared map with an explicit frame; heights are read off the polygons.
pub fn reflection_map_with_frame(
    geometry: &Geometry,
    anchor: Point,
    radius: f64,
    frame: Frame,
) -> Result<ReflectionMap> {
    check_anchor(geometry, anchor, radius)?;
    if dot(frame.axis, geometry.line.normal) <= 0.0 {
        return Err(Error::Frame("frame axis must point towards the plus side".into()));
    }
    let reflected = Polygon::new(geometry.minus.vertices.iter().map(|v| geometry.line.reflect(*v)).collect());
    let eta_plus = height_function(&geometry.plus, anchor, frame, radius)?;
    let eta_minus = height_function(&reflected, anchor, frame, radius)?;
    Ok(ReflectionMap::hypograph_from_heights(geometry, anchor, radius, frame, eta_plus, eta_minus))
}

fn default_frame(geometry: &Geometry, anchor: Point) -> Result<Frame> {
    let seg = geometry
        .interface
        .iter()
        .find(|s| dist(s[0], anchor) < 1e-12 || dist(s[1], anchor) < 1e-12)
        .ok_or_else(|| Error::Frame("anchor is not an interface endpoint".into()))?;
    let other = if dist(seg[0], anchor) < 1e-12 { seg[1] } else { seg[0] };
    let along = sub(other, anchor);
    let along = scale(along, 1.0 / norm(along));
    Frame::new(add(along, geometry.line.normal))
}

/// Height of the hypograph representation of `poly` over `[-r, r]`.
fn height_function(poly: &Polygon, anchor: Point, frame: Frame, r: f64) -> Result<PiecewiseLinear> {
    let local: Vec<(f64, f64)> = poly.vertices.iter().map(|v| frame.local_coords(anchor, *v)).collect();
    let cast = |y: f64| -> Result<f64> {
        let n = local.len();
        let mut ts = Vec::new();
        for i in 0..n {
            let (ya, ta) = local[i];
            let (yb, tb) = local[(i + 1) % n];
            if (ya - y) * (yb - y) < 0.0 {
                ts.push(ta + (y - ya) * (tb - ta) / (yb - ya));
            }
        }
        ts.sort_by(f64::total_cmp);
        let exit = (1..ts.len())
            .step_by(2)
            .min_by(|&a, &b| ts[a].abs().total_cmp(&ts[b].abs()))
            .ok_or_else(|| Error::Frame(format!("compartment is not a hypograph over y = {y}")))?;
        if ts[exit - 1] > ts[exit] - r * (1.0 - 1e-9) {
            return Err(Error::Frame(format!(
                "radius {r} too large for this frame; try a smaller radius"
            )));
        }
        Ok(ts[exit])
    };
    let mut ys: Vec<f64> = vec![-r, r];
    ys.extend(local.iter().map(|p| p.0).filter(|y| y.abs() < r));
    ys.sort_by(f64::total_cmp);
    ys.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * r);
    let mut left_right: Vec<(f64, f64)> = Vec::new();
    for w in ys.windows(2) {
        let (a, b) = (w[0], w[1]);
        let span = b - a;
        let y1 = a + 0.25 * span;
        let y2 = a + 0.75 * span;
        let (t1, t2) = (cast(y1)?, cast(y2)?);
        for probe in [a + 1e-6 * span, a + 0.5 * span, b - 1e-6 * span] {
            let t = cast(probe)?;
            let predicted = t1 + (probe - y1) * (t2 - t1) / (y2 - y1);
            if (t - predicted).abs() > 1e-8 * (1.0 + r) {
                return Err(Error::Frame("height is not linear between vertices; try a smaller radius".into()));
            }
        }
        let slope = (t2 - t1) / (y2 - y1);
        left_right.push((t1 + (a - y1) * slope, t1 + (b - y1) * slope));
    }
    let mut knots = Vec::with_capacity(ys.len());
    for (k, &y) in ys.iter().enumerate() {
        let v = if k == 0 {
            left_right[0].0
        } else if k == ys.len() - 1 {
            left_right[k - 1].1
        } else {
            let (from_left, from_right) = (left_right[k - 1].1, left_right[k].0);
            if (from_left - from_right).abs() > 1e-8 * (1.0 + r) {
                return Err(Error::Frame("boundary is not a graph over the frame; try a smaller radius".into()));
            }
            0.5 * (from_left + from_right)
        };
        knots.push((y, v));
    }
    Ok(PiecewiseLinear::new(knots))
}

impl ReflectionMap {
    pub fn flat(geometry: &Geometry, anchor: Point, radius: f64) -> ReflectionMap {
        ReflectionMap {
            anchor,
            radius,
            line: geometry.line,
            kind: MapKind::Flat,
            plus: geometry.plus.clone(),
            minus: geometry.minus.clone(),
            interface: geometry.interface.clone(),
            tol: 1e-12 * geometry.plus.diameter().max(geometry.minus.diameter()).max(1.0),
        }
    }

    /// Sheared map from explicit height functions (no consistency checks).
    pub fn hypograph_from_heights(
        geometry: &Geometry,
        anchor: Point,
        radius: f64,
        frame: Frame,
        eta_plus: PiecewiseLinear,
        eta_minus: PiecewiseLinear,
    ) -> ReflectionMap {
        let mut map = ReflectionMap::flat(geometry, anchor, radius);
        map.kind = MapKind::Hypograph { frame, eta_plus, eta_minus };
        map
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, MapKind::Flat)
    }

    fn polygon(&self, side: Side) -> &Polygon {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    /// Frame coordinates `(y, s)` of `x` seen from `side`, with `s <= 0` inside.
    fn cylinder_coords(&self, side: Side, x: Point) -> Option<(f64, f64)> {
        match &self.kind {
            MapKind::Flat => None,
            MapKind::Hypograph { frame, eta_plus, eta_minus } => {
                let (p, eta) = match side {
                    Side::Plus => (x, eta_plus),
                    Side::Minus => (self.line.reflect(x), eta_minus),
                };
                let (y, t) = frame.local_coords(self.anchor, p);
                Some((y, t - eta.eval(y)))
            }
        }
    }

    /// Whether `x` lies in the closure of compartment `side` and in the neighbourhood.
    pub fn contains_side(&self, side: Side, x: Point) -> bool {
        if !self.polygon(side).contains_closed(x, self.tol) {
            return false;
        }
        let signed = self.line.signed_distance(x);
        let on_side = match side {
            Side::Plus => signed >= -self.tol,
            Side::Minus => signed <= self.tol,
        };
        if !on_side {
            return false;
        }
        match self.cylinder_coords(side, x) {
            None => dist(x, self.anchor) < self.radius,
            Some((y, s)) => y.abs() < self.radius && s > -self.radius && s <= self.tol,
        }
    }

    /// Compartment containing `x` within the neighbourhood, plus first.
    pub fn side_of(&self, x: Point) -> Option<Side> {
        Side::BOTH.into_iter().find(|&s| self.contains_side(s, x))
    }

    /// Image of `x`, regarded as a point of compartment `side`.
    pub fn apply_from(&self, side: Side, x: Point) -> Result<Point> {
        if !self.contains_side(side, x) {
            return Err(Error::Domain(format!(
                "{x:?} is outside the {} part of the neighbourhood of {:?}",
                side.name(),
                self.anchor
            )));
        }
        Ok(self.image(side, x))
    }

    fn image(&self, side: Side, x: Point) -> Point {
        match &self.kind {
            MapKind::Flat => self.line.reflect(x),
            MapKind::Hypograph { frame, eta_plus, eta_minus } => match side {
                Side::Plus => {
                    let (y, t) = frame.local_coords(self.anchor, x);
                    let s = t - eta_plus.eval(y);
                    self.line.reflect(frame.global_point(self.anchor, y, eta_minus.eval(y) + s))
                }
                Side::Minus => {
                    let (y, t) = frame.local_coords(self.anchor, self.line.reflect(x));
                    let s = t - eta_minus.eval(y);
                    frame.global_point(self.anchor, y, eta_plus.eval(y) + s)
                }
            },
        }
    }

    /// Image of `x`; fails outside the closure of the compartments or the neighbourhood.
    pub fn apply(&self, x: Point) -> Result<Point> {
        let side = self
            .side_of(x)
            .ok_or_else(|| Error::Domain(format!("{x:?} is outside the neighbourhood of {:?}", self.anchor)))?;
        Ok(self.image(side, x))
    }

    fn kinks(&self) -> Vec<f64> {
        match &self.kind {
            MapKind::Flat => Vec::new(),
            MapKind::Hypograph { eta_plus, eta_minus, .. } => {
                let mut k = eta_plus.interior_knots();
                k.extend(eta_minus.interior_knots());
                k
            }
        }
    }

    /// Random points of the open compartments inside the neighbourhood.
    pub fn sample_interior(&self, n: usize, rng: &mut impl Rng) -> Vec<(Side, Point)> {
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0;
        while out.len() < n && attempts < 1000 * n {
            attempts += 1;
            let side = if rng.random_bool(0.5) { Side::Plus } else { Side::Minus };
            let x = match &self.kind {
                MapKind::Flat => {
                    let rho = self.radius * rng.random_range(0.0f64..1.0).sqrt();
                    let th = rng.random_range(0.0..std::f64::consts::TAU);
                    add(self.anchor, [rho * th.cos(), rho * th.sin()])
                }
                MapKind::Hypograph { frame, eta_plus, eta_minus } => {
                    let y = rng.random_range(-self.radius..self.radius);
                    let s = rng.random_range(-self.radius..0.0);
                    match side {
                        Side::Plus => frame.global_point(self.anchor, y, eta_plus.eval(y) + s),
                        Side::Minus => self.line.reflect(frame.global_point(self.anchor, y, eta_minus.eval(y) + s)),
                    }
                }
            };
            let poly = self.polygon(side);
            if poly.contains_strictly(x, self.tol) && self.contains_side(side, x) {
                out.push((side, x));
            }
        }
        out
    }

    /// Samples the defining properties: involution, unit Jacobian (central
    /// differences away from kinks), fixed interface, boundary to boundary.
    pub fn verify(&self, n_samples: usize, fd_step: f64, seed: u64) -> Result<ReflectionReport> {
        if n_samples < 100 {
            return Err(Error::Config(format!("need at least 100 samples, got {n_samples}")));
        }
        if !(fd_step > 0.0 && fd_step < self.radius / 10.0) {
            return Err(Error::Config(format!(
                "finite-difference step must lie in (0, radius/10), got {fd_step}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = self.sample_interior(n_samples, &mut rng);
        let kinks = self.kinks();
        let mut rep = ReflectionReport {
            involution: 0.0,
            det: 0.0,
            gamma_fixed: 0.0,
            boundary: 0.0,
            samples: samples.len(),
            det_samples: 0,
        };
        for &(side, x) in &samples {
            let y = self.image(side, x);
            let back = self.image(side.opposite(), y);
            rep.involution = rep.involution.max(dist(back, x));

            if let Some((yc, _)) = self.cylinder_coords(side, x) {
                if kinks.iter().any(|k| (yc - k).abs() <= 2.0 * fd_step) {
                    continue;
                }
            }
            let stencil = [[fd_step, 0.0], [-fd_step, 0.0], [0.0, fd_step], [0.0, -fd_step]];
            let pts: Vec<Point> = stencil.iter().map(|d| add(x, *d)).collect();
            let inside = pts.iter().all(|p| {
                self.polygon(side).contains_strictly(*p, self.tol)
                    && self.contains_side(side, *p)
                    && self.cylinder_coords(side, *p).is_none_or(|(_, s)| s > -self.radius + 2.0 * fd_step)
            });
            if !inside {
                continue;
            }
            let im: Vec<Point> = pts.iter().map(|p| self.image(side, *p)).collect();
            let dx = scale(sub(im[0], im[1]), 0.5 / fd_step);
            let dy = scale(sub(im[2], im[3]), 0.5 / fd_step);
            let det = dx[0] * dy[1] - dx[1] * dy[0];
            rep.det = rep.det.max((det.abs() - 1.0).abs());
            rep.det_samples += 1;
        }
        for seg in &self.interface {
            for k in 0..=400 {
                let t = k as f64 / 400.0;
                let z = add(seg[0], scale(sub(seg[1], seg[0]), t));
                for side in Side::BOTH {
                    if self.contains_side(side, z) {
                        rep.gamma_fixed = rep.gamma_fixed.max(dist(self.image(side, z), z));
                    }
                }
            }
        }
        for side in Side::BOTH {
            let poly = self.polygon(side).clone();
            for (a, b) in poly.edges() {
                for k in 0..=200 {
                    let x = add(a, scale(sub(b, a), k as f64 / 200.0));
                    let on_interface = self
                        .interface
                        .iter()
                        .any(|s| super::polygon::segment_distance(x, s[0], s[1]) <= self.tol);
                    if on_interface || !self.contains_side(side, x) {
                        continue;
                    }
                    let y = self.image(side, x);
                    rep.boundary = rep.boundary.max(self.polygon(side.opposite()).boundary_distance(y));
                }
            }
        }
        Ok(rep)
    }
}

/// Partner cell of each cell inside the neighbourhood.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionPartners {
    pub partner: Vec<Option<usize>>,
}

impl ReflectionPartners {
    pub fn build(map: &ReflectionMap, mesh: &Mesh) -> Result<ReflectionPartners> {
        let mut partner = vec![None; mesh.n_cells()];
        for (c, cell) in mesh.cells.iter().enumerate() {
            if !map.contains_side(cell.side, cell.center) {
                continue;
            }
            let y = map.image(cell.side, cell.center);
            let k = mesh.locate(y).filter(|&k| mesh.cells[k].side == cell.side.opposite()).ok_or_else(|| {
                Error::Domain(format!("reflected point {y:?} of cell {c} lies outside the mesh"))
            })?;
            partner[c] = Some(k);
        }
        Ok(ReflectionPartners { partner })
    }

    pub fn count(&self) -> usize {
        self.partner.iter().filter(|p| p.is_some()).count()
    }
}

/// Densities of the opposite compartment pulled back through the reflection.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedField {
    pub n_species: usize,
    pub mask: Vec<bool>,
    pub values: Vec<f64>,
}

impl ExtendedField {
    pub fn cell(&self, c: usize) -> Option<&[f64]> {
        self.mask[c].then(|| &self.values[c * self.n_species..(c + 1) * self.n_species])
    }
}

pub fn extend_field(u: &StateField, partners: &ReflectionPartners) -> ExtendedField {
    let n = u.n_species;
    let mut values = vec![0.0; u.values.len()];
    let mut mask = vec![false; partners.partner.len()];
    for (c, p) in partners.partner.iter().enumerate() {
        if let Some(k) = p {
            values[c * n..(c + 1) * n].copy_from_slice(u.cell(*k));
            mask[c] = true;
        }
    }
    ExtendedField { n_species: n, mask, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GeometryDescriptor, SeparatingLine};

    pub(crate) fn notched() -> Geometry {
        Geometry::build(&GeometryDescriptor {
            plus: Some(Polygon::rect(0.0, 0.0, 1.0, 1.0).vertices),
            minus: Some(Polygon::rect(-1.0, 0.0, 0.0, 0.5).vertices),
            interface: Some(vec![[[0.0, 0.0], [0.0, 0.5]]]),
            separating_line: Some(SeparatingLine::new([0.0, 0.0], [1.0, 0.0])),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn flat_map_is_mirror() {
        let g = Geometry::flat_symmetric();
        let m = reflection_map(&g, [0.0, 0.5], 0.3).unwrap();
        assert!(m.is_flat());
        assert_eq!(m.apply([0.1, 0.6]).unwrap(), [-0.1, 0.6]);
        assert_eq!(m.apply([0.0, 0.5]).unwrap(), [0.0, 0.5]);
        assert!(m.apply([0.5, 0.5]).is_err());
    }

    #[test]
    fn endpoint_of_template_gives_identity_shear() {
        let g = Geometry::triple_junction();
        let m = reflection_map(&g, [0.0, 0.5], 0.2).unwrap();
        assert!(!m.is_flat());
        let y = m.apply([0.05, 0.45]).unwrap();
        assert!(dist(y, [-0.05, 0.45]) < 1e-14);
        assert!(dist(m.apply([0.0, 0.4]).unwrap(), [0.0, 0.4]) < 1e-14);
    }

    #[test]
    fn notched_shear_is_nontrivial_and_verified() {
        let g = notched();
        let m = reflection_map(&g, [0.0, 0.5], 0.15).unwrap();
        let rep = m.verify(400, 1e-4, 3).unwrap();
        assert!(rep.involution <= 1e-10, "{rep:?}");
        assert!(rep.det <= 1e-6, "{rep:?}");
        assert!(rep.gamma_fixed <= 1e-10, "{rep:?}");
        assert!(rep.boundary <= 1e-10, "{rep:?}");
        assert!(rep.det_samples > 100);
        // a point of the minus compartment near the corner does not go to its mirror image
        let x = [-0.05, 0.48];
        let y = m.apply(x).unwrap();
        assert!(dist(y, [0.05, 0.48]) > 1e-3);
        assert!(g.plus.contains(y));
    }

    #[test]
    fn mismatched_heights_are_flagged() {
        let g = notched();
        let m = reflection_map(&g, [0.0, 0.5], 0.15).unwrap();
        let MapKind::Hypograph { frame, eta_plus, eta_minus } = m.kind.clone() else { panic!() };
        let bad = ReflectionMap::hypograph_from_heights(&g, [0.0, 0.5], 0.15, frame, eta_plus, eta_minus.shifted(0.01));
        let rep = bad.verify(200, 1e-4, 1).unwrap();
        assert!(rep.gamma_fixed > 1e-3, "{rep:?}");
    }

    #[test]
    fn verify_rejects_bad_parameters() {
        let m = reflection_map(&Geometry::flat_symmetric(), [0.0, 0.5], 0.3).unwrap();
        assert!(m.verify(99, 1e-3, 0).is_err());
        assert!(m.verify(100, 0.05, 0).is_err());
        assert!(m.verify(100, 0.0, 0).is_err());
    }

    #[test]
    fn anchor_off_interface_is_rejected() {
        assert!(reflection_map(&Geometry::triple_junction(), [0.0, 0.75], 0.1).is_err());
        assert!(reflection_map(&Geometry::flat_symmetric(), [0.0, 0.5], 0.0).is_err());
    }

    #[test]
    fn oversized_radius_is_a_frame_error() {
        let err = reflection_map(&notched(), [0.0, 0.5], 0.9).unwrap_err();
        assert!(matches!(err, Error::Frame(_)), "{err}");
    }

    #[test]
    fn partners_mirror_on_symmetric_mesh() {
        let g = Geometry::flat_symmetric();
        let mesh = Mesh::build(&g, 8).unwrap();
        let m = reflection_map(&g, [0.0, 0.5], 0.4).unwrap();
        let p = ReflectionPartners::build(&m, &mesh).unwrap();
        assert!(p.count() > 0);
        for (c, k) in p.partner.iter().enumerate() {
            if let Some(k) = k {
                let (a, b) = (&mesh.cells[c], &mesh.cells[*k]);
                assert_eq!(a.iy, b.iy);
                assert_eq!(a.ix + b.ix, mesh.nx - 1);
                assert_eq!(p.partner[*k], Some(c));
            }
        }
    }
}
