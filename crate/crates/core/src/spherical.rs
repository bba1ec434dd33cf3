//! Convex spherical polygons on `S^2`: clipping by great circles and areas.

use nalgebra::Vector3;

/// Polygon vertices closer than this are merged.
pub const MERGE_TOL: f64 = 1e-10;

/// Signed distances within this band count as lying on a clipping circle.
const ON_PLANE_TOL: f64 = 1e-14;

/// The great circle an edge lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeLabel {
    /// A facet of the cap's cone (index into the cone's generator list).
    Cap(usize),
    /// The bisector shared with another cell owner.
    Neighbor(usize),
}

/// Convex spherical polygon inside an open hemisphere. Edge `k` runs from
/// `vertices[k]` to `vertices[k + 1]` along the great circle `labels[k]`.
#[derive(Debug, Clone, Default)]
pub struct SphericalPolygon {
    vertices: Vec<Vector3<f64>>,
    labels: Vec<EdgeLabel>,
}

impl SphericalPolygon {
    pub fn new(vertices: Vec<Vector3<f64>>, labels: Vec<EdgeLabel>) -> Self {
        assert_eq!(vertices.len(), labels.len());
        let mut poly = Self { vertices, labels };
        poly.merge_close_vertices();
        poly
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn labels(&self) -> &[EdgeLabel] {
        &self.labels
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Keeps the part where `<normal, v> >= 0`; newly created edges get `label`.
    pub fn clip(&self, normal: &Vector3<f64>, label: EdgeLabel) -> Self {
        if self.is_empty() {
            return Self::empty();
        }
        let n = self.vertices.len();
        let side: Vec<f64> = self.vertices.iter().map(|v| normal.dot(v)).collect();
        if side.iter().all(|&s| s >= -ON_PLANE_TOL) {
            return self.clone();
        }
        if side.iter().all(|&s| s <= ON_PLANE_TOL) {
            return Self::empty();
        }
        let mut vertices = Vec::with_capacity(n + 1);
        let mut labels = Vec::with_capacity(n + 1);
        for k in 0..n {
            let next = (k + 1) % n;
            let (a, b) = (&self.vertices[k], &self.vertices[next]);
            let (sa, sb) = (side[k], side[next]);
            let a_in = sa >= -ON_PLANE_TOL;
            let b_in = sb >= -ON_PLANE_TOL;
            match (a_in, b_in) {
                (true, true) => {
                    vertices.push(*a);
                    labels.push(self.labels[k]);
                }
                (true, false) => {
                    if sa > ON_PLANE_TOL {
                        vertices.push(*a);
                        labels.push(self.labels[k]);
                        vertices.push(crossing(a, b, sa, sb));
                    } else {
                        // `a` already lies on the circle; the cut edge starts here.
                        vertices.push(*a);
                    }
                    labels.push(label);
                }
                (false, true) => {
                    if sb > ON_PLANE_TOL {
                        vertices.push(crossing(a, b, sa, sb));
                        labels.push(self.labels[k]);
                    }
                }
                (false, false) => {}
            }
        }
        Self::new(vertices, labels)
    }

    /// Area by angle excess: sum of interior angles minus `(k - 2) pi`.
    pub fn area(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        angle_excess(&self.vertices).max(0.0)
    }

    /// Geodesic fan from the first vertex.
    pub fn fan(&self) -> Vec<[Vector3<f64>; 3]> {
        if self.is_empty() {
            return Vec::new();
        }
        let v0 = self.vertices[0];
        self.vertices[1..].windows(2).map(|w| [v0, w[0], w[1]]).collect()
    }

    /// Point-in-polygon test for counter-clockwise polygons.
    pub fn contains(&self, v: &Vector3<f64>, tol: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        let n = self.vertices.len();
        (0..n).all(|k| {
            let edge_normal = self.vertices[k].cross(&self.vertices[(k + 1) % n]);
            let len = edge_normal.norm();
            len == 0.0 || edge_normal.dot(v) / len >= -tol
        })
    }

    fn merge_close_vertices(&mut self) {
        if self.vertices.len() < 2 {
            return;
        }
        let mut vertices: Vec<Vector3<f64>> = Vec::with_capacity(self.vertices.len());
        let mut labels: Vec<EdgeLabel> = Vec::with_capacity(self.vertices.len());
        for (v, l) in self.vertices.iter().zip(&self.labels) {
            if let Some(last) = vertices.last() {
                if (last - v).norm() < MERGE_TOL {
                    // Collapse the degenerate edge; keep the outgoing label.
                    *labels.last_mut().unwrap() = *l;
                    continue;
                }
            }
            vertices.push(*v);
            labels.push(*l);
        }
        while vertices.len() > 1 && (vertices[0] - vertices[vertices.len() - 1]).norm() < MERGE_TOL {
            vertices.pop();
            labels.pop();
        }
        self.vertices = vertices;
        self.labels = labels;
    }
}

/// Point where the minor arc between `a` and `b` (on opposite sides) crosses the plane.
fn crossing(a: &Vector3<f64>, b: &Vector3<f64>, sa: f64, sb: f64) -> Vector3<f64> {
    ((b * sa - a * sb) / (sa - sb)).normalize()
}

/// Gauss–Bonnet area of a convex spherical polygon given by its vertices.
pub fn angle_excess(vertices: &[Vector3<f64>]) -> f64 {
    let k = vertices.len();
    if k < 3 {
        return 0.0;
    }
    let angles: f64 = (0..k)
        .map(|i| {
            let p = vertices[i];
            let prev = vertices[(i + k - 1) % k];
            let next = vertices[(i + 1) % k];
            let ta = prev - p * p.dot(&prev);
            let tb = next - p * p.dot(&next);
            ta.cross(&tb).norm().atan2(ta.dot(&tb))
        })
        .sum();
    angles - (k as f64 - 2.0) * std::f64::consts::PI
}

/// Area of a geodesic triangle (Van Oosterom–Strackee solid angle).
pub fn triangle_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let num = a.dot(&b.cross(c)).abs();
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}
