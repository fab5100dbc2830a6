//! Planar polygon and segment helpers.

use super::Point;

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// A simple closed polygon given by its vertices in either orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Polygon::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| cross(a, b)).sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max(dist(*a, *b));
            }
        }
        d
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Even-odd test; points on the boundary may land on either side.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Interior strictly beyond `tol` from the boundary.
    pub fn contains_strictly(&self, p: Point, tol: f64) -> bool {
        self.contains(p) && self.boundary_distance(p) > tol
    }

    /// Closure up to `tol`.
    pub fn contains_closed(&self, p: Point, tol: f64) -> bool {
        self.contains(p) || self.boundary_distance(p) <= tol
    }

    /// Points just inside each edge midpoint.
    pub fn interior_probes(&self) -> Vec<Point> {
        let offset = 1e-7 * self.diameter().max(1e-12);
        let orient = self.signed_area().signum();
        self.edges()
            .map(|(a, b)| {
                let m = scale(add(a, b), 0.5);
                let t = sub(b, a);
                let len = norm(t).max(1e-300);
                // inward normal for a counter-clockwise polygon is the left normal
                let n = [-t[1] / len * orient, t[0] / len * orient];
                add(m, scale(n, offset))
            })
            .collect()
    }
}

pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    dist(p, add(a, scale(ab, t)))
}

/// True when the open segments cross at a single interior point.
pub fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    let eps = 1e-14;
    ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
}

/// Whether the interiors of two polygons intersect.
pub fn interiors_overlap(p: &Polygon, q: &Polygon) -> bool {
    for (a, b) in p.edges() {
        for (c, d) in q.edges() {
            if segments_cross(a, b, c, d) {
                return true;
            }
        }
    }
    let tol = 1e-9 * p.diameter().max(q.diameter());
    let strictly_in = |poly: &Polygon, x: Point| poly.contains_strictly(x, tol);
    p.vertices.iter().any(|v| strictly_in(q, *v))
        || q.vertices.iter().any(|v| strictly_in(p, *v))
        || p.interior_probes().into_iter().any(|x| q.contains(x) && q.boundary_distance(x) > 0.0)
        || q.interior_probes().into_iter().any(|x| p.contains(x) && p.boundary_distance(x) > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_area_and_containment() {
        let sq = Polygon::rect(0.0, 0.0, 1.0, 1.0);
        assert_eq!(sq.area(), 1.0);
        assert!(sq.contains([0.5, 0.5]));
        assert!(!sq.contains([1.5, 0.5]));
        assert!(sq.contains_closed([1.0, 0.3], 1e-12));
        assert!((sq.boundary_distance([0.5, 0.25]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn overlap_detection() {
        let a = Polygon::rect(0.0, 0.0, 1.0, 1.0);
        let b = Polygon::rect(-1.0, 0.0, 0.0, 1.0);
        let c = Polygon::rect(0.5, 0.5, 1.5, 1.5);
        assert!(!interiors_overlap(&a, &b));
        assert!(interiors_overlap(&a, &c));
        assert!(interiors_overlap(&a, &a.clone()));
        let inner = Polygon::rect(0.25, 0.25, 0.75, 0.75);
        assert!(interiors_overlap(&a, &inner));
    }
}
