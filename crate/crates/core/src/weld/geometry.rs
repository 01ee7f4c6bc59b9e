//! Planar polygons and segments in the (x, z) section plane, mm.

pub type Point = [f64; 2];

const ON_EDGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).hypot(self.b[1] - self.a[1])
    }

    pub fn direction(&self) -> Point {
        let l = self.length();
        [(self.b[0] - self.a[0]) / l, (self.b[1] - self.a[1]) / l]
    }

    /// Left-hand unit normal of a → b.
    pub fn normal(&self) -> Point {
        let d = self.direction();
        [-d[1], d[0]]
    }

    pub fn distance_to(&self, p: Point) -> f64 {
        let (dx, dz) = (self.b[0] - self.a[0], self.b[1] - self.a[1]);
        let len2 = dx * dx + dz * dz;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p[0] - self.a[0]) * dx + (p[1] - self.a[1]) * dz) / len2).clamp(0.0, 1.0)
        };
        (p[0] - self.a[0] - t * dx).hypot(p[1] - self.a[1] - t * dz)
    }

    /// Parameters (s on self, t on other) of a proper or touching intersection.
    pub fn intersect(&self, other: &Segment) -> Option<(f64, f64)> {
        let r = [self.b[0] - self.a[0], self.b[1] - self.a[1]];
        let s = [other.b[0] - other.a[0], other.b[1] - other.a[1]];
        let denom = cross(r, s);
        if denom.abs() < 1e-15 * (r[0].hypot(r[1]) * s[0].hypot(s[1])).max(1e-300) {
            return None;
        }
        let q = [other.a[0] - self.a[0], other.a[1] - self.a[1]];
        let u = cross(q, s) / denom;
        let v = cross(q, r) / denom;
        let eps = 1e-12;
        if (-eps..=1.0 + eps).contains(&u) && (-eps..=1.0 + eps).contains(&v) {
            Some((u, v))
        } else {
            None
        }
    }
}

pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|e| cross(e.a, e.b)).sum::<f64>()
    }

    pub fn on_boundary(&self, p: Point) -> bool {
        self.edges().any(|e| e.distance_to(p) <= ON_EDGE_TOL)
    }

    /// Point-in-polygon, edges inclusive.
    pub fn contains(&self, p: Point) -> bool {
        if self.on_boundary(p) {
            return true;
        }
        self.strictly_contains(p)
    }

    pub fn strictly_contains(&self, p: Point) -> bool {
        let mut inside = false;
        for e in self.edges() {
            let (a, b) = (e.a, e.b);
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside && !self.on_boundary(p)
    }

    /// No two non-adjacent edges touch, and no edge is degenerate.
    pub fn is_simple(&self) -> bool {
        let edges: Vec<Segment> = self.edges().collect();
        let n = edges.len();
        if n < 3 || edges.iter().any(|e| e.length() == 0.0) {
            return false;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if !adjacent && edges[i].intersect(&edges[j]).is_some() {
                    return false;
                }
            }
        }
        self.signed_area().abs() > 0.0
    }

    /// Interiors overlap (touching along edges is allowed).
    pub fn overlaps(&self, other: &Polygon) -> bool {
        let interior_probe = |poly: &Polygon, other: &Polygon| {
            poly.vertices.iter().any(|&v| other.strictly_contains(v))
                || poly.edges().any(|e| {
                    let m = [(e.a[0] + e.b[0]) / 2.0, (e.a[1] + e.b[1]) / 2.0];
                    other.strictly_contains(m)
                })
        };
        if interior_probe(self, other) || interior_probe(other, self) {
            return true;
        }
        // proper crossings of edges
        for e in self.edges() {
            for f in other.edges() {
                if let Some((u, v)) = e.intersect(&f) {
                    let eps = 1e-9;
                    if u > eps && u < 1.0 - eps && v > eps && v < 1.0 - eps && cross(e.direction(), f.direction()).abs() > 1e-9 {
                        return true;
                    }
                }
            }
        }
        false
    }

    pub fn bounding_box(&self) -> (Point, Point) {
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
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polygon {
        Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    #[test]
    fn containment_is_edge_inclusive() {
        let s = square();
        assert!(s.contains([0.5, 0.5]));
        assert!(s.contains([1.0, 0.3]));
        assert!(s.contains([0.0, 0.0]));
        assert!(!s.contains([1.0001, 0.5]));
        assert!(!s.strictly_contains([1.0, 0.3]));
    }

    #[test]
    fn simplicity() {
        assert!(square().is_simple());
        let bowtie = Polygon::new(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(!bowtie.is_simple());
    }

    #[test]
    fn overlap_detection() {
        let a = square();
        let touching = Polygon::new(vec![[1.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0]]);
        let crossing = Polygon::new(vec![[0.5, 0.5], [2.0, 0.5], [2.0, 2.0], [0.5, 2.0]]);
        assert!(!a.overlaps(&touching));
        assert!(a.overlaps(&crossing));
    }

    #[test]
    fn segment_intersection() {
        let s = Segment::new([0.0, 0.0], [2.0, 0.0]);
        let t = Segment::new([1.0, -1.0], [1.0, 1.0]);
        let (u, v) = s.intersect(&t).unwrap();
        assert!((u - 0.5).abs() < 1e-15 && (v - 0.5).abs() < 1e-15);
        assert!(s.intersect(&Segment::new([3.0, -1.0], [3.0, 1.0])).is_none());
        assert!((t.distance_to([0.0, 0.0]) - 1.0).abs() < 1e-15);
    }
}
