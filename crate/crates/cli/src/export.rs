//! Wavefront OBJ export of the boundary of a hull pseudo-cone near the origin.

use std::collections::BTreeMap;
use std::fmt::Write;

use conecurve_core::curvature;
use conecurve_core::HullPseudoCone;
use nalgebra::Vector3;
use thiserror::Error;

const PLANE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ExportError {
    #[error("radius {radius} must exceed the largest radial value {max}")]
    RadiusTooSmall { radius: f64, max: f64 },
    #[error("export needs a body in three dimensions")]
    Dimension,
    #[error(transparent)]
    Geometry(conecurve_core::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", v[0], v[1], v[2]).unwrap();
        }
        for f in &self.faces {
            writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
        }
        out
    }

    /// Number of faces sharing each undirected edge.
    pub fn edge_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut counts = BTreeMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Every edge lies on one face (mesh border) or two (interior); directed
    /// edges of interior pairs run in opposite directions.
    pub fn is_watertight(&self) -> bool {
        let mut directed = BTreeMap::new();
        for f in &self.faces {
            for k in 0..3 {
                *directed.entry((f[k], f[(k + 1) % 3])).or_insert(0usize) += 1;
            }
        }
        directed.values().all(|&c| c == 1) && self.edge_counts().values().all(|&c| c == 1 || c == 2)
    }
}

/// Triangulates the faces of `K` visible in `conv({p_i} ∪ {p_i + R' w_j})`,
/// where `R' = (R + max |p_i|) / min_j <w_j, d>` pushes the truncation past
/// the ball of radius `R`. Only faces with outer normal in `C°` are kept, so
/// the truncating faces are dropped and the mesh is open along the cut.
pub fn truncated_mesh(k: &HullPseudoCone, radius: f64) -> Result<Mesh, ExportError> {
    if k.dim() != 3 {
        return Err(ExportError::Dimension);
    }
    let max = k.radials().iter().copied().fold(0.0, f64::max);
    if !(radius > max) {
        return Err(ExportError::RadiusTooSmall { radius, max });
    }
    let axis = k.cone().axis();
    let rays: Vec<Vector3<f64>> = k.cone().generators().iter().map(|w| Vector3::new(w[0], w[1], w[2])).collect();
    let min_axis = k.cone().generators().iter().map(|w| w.dot(&axis)).fold(f64::INFINITY, f64::min);
    let reach = (radius + max) / min_axis;
    // Points with empty cells lie on faces spanned by the others.
    let areas = curvature::cell_areas(k).map_err(ExportError::Geometry)?;
    let mut points: Vec<Vector3<f64>> =
        (0..k.len()).filter(|&i| areas[i] > 0.0).map(|i| k.point(i)).map(|p| Vector3::new(p[0], p[1], p[2])).collect();
    let apexes = points.len();
    for i in 0..apexes {
        for w in &rays {
            points.push(points[i] + w * reach);
        }
    }
    let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let tol = PLANE_TOL * scale;

    let mut planes: Vec<(Vector3<f64>, f64)> = Vec::new();
    let mut faces: Vec<Vec<usize>> = Vec::new();
    let n = points.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let normal = (points[b] - points[a]).cross(&(points[c] - points[a]));
                let len = normal.norm();
                if len <= tol * scale {
                    continue;
                }
                let mut normal = normal / len;
                let mut offset = normal.dot(&points[a]);
                let (mut above, mut below) = (false, false);
                for p in &points {
                    let s = normal.dot(p) - offset;
                    above |= s > tol;
                    below |= s < -tol;
                }
                if above && below {
                    continue;
                }
                if above {
                    normal = -normal;
                    offset = -offset;
                }
                if planes.iter().any(|(m, o)| (m - normal).norm() < 1e-9 && (o - offset).abs() < tol) {
                    continue;
                }
                planes.push((normal, offset));
                let on: Vec<usize> = (0..n).filter(|&i| (normal.dot(&points[i]) - offset).abs() <= tol).collect();
                if rays.iter().all(|w| normal.dot(w) <= PLANE_TOL) {
                    faces.push(order_around(&points, on, &normal));
                }
            }
        }
    }

    let mut index: Vec<Option<usize>> = vec![None; n];
    let mut used: Vec<usize> = faces.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let vertices = used
        .iter()
        .enumerate()
        .map(|(new, &old)| {
            index[old] = Some(new);
            [points[old].x, points[old].y, points[old].z]
        })
        .collect();
    let mut triangles = Vec::new();
    for face in &faces {
        let ids: Vec<usize> = face.iter().map(|&i| index[i].expect("face vertex is indexed")).collect();
        for w in 1..ids.len() - 1 {
            triangles.push([ids[0], ids[w], ids[w + 1]]);
        }
    }
    Ok(Mesh { vertices, faces: triangles })
}

/// Counter-clockwise order seen from the side `normal` points to.
fn order_around(points: &[Vector3<f64>], mut ids: Vec<usize>, normal: &Vector3<f64>) -> Vec<usize> {
    let centroid = ids.iter().map(|&i| points[i]).sum::<Vector3<f64>>() / ids.len() as f64;
    let e1 = (points[ids[0]] - centroid).normalize();
    let e2 = normal.cross(&e1);
    let angle = |i: usize| {
        let d = points[i] - centroid;
        d.dot(&e2).atan2(d.dot(&e1))
    };
    ids.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)).then(a.cmp(&b)));
    ids
}

#[cfg(test)]
mod tests {
    use super::*;
    use conecurve_core::{PointedCone, Vector};
    use nalgebra::dvector;

    fn five_vertex() -> HullPseudoCone {
        let dirs = [[1.0, 1.0, 1.0], [3.0, 1.0, 1.0], [1.0, 3.0, 1.0], [1.0, 1.0, 3.0], [2.0, 2.0, 1.0]]
            .iter()
            .map(|d| Vector::from_column_slice(d).normalize())
            .collect();
        let cone = PointedCone::positive_orthant(3).unwrap();
        HullPseudoCone::new(cone, dirs, vec![1.2, 1.5, 1.45, 1.55, 1.3]).unwrap().snap_to_radial().unwrap()
    }

    #[test]
    fn five_vertex_mesh_is_watertight_and_on_the_boundary() {
        let k = five_vertex();
        let mesh = truncated_mesh(&k, 10.0).unwrap();
        assert!(mesh.is_watertight());
        // Every cell owner appears as a vertex.
        for i in 0..k.len() {
            let p = k.point(i);
            assert!(mesh.vertices.iter().any(|v| (dvector![v[0], v[1], v[2]] - &p).norm() < 1e-12));
        }
        // Vertices lie in K, and face centroids lie on its boundary.
        for v in &mesh.vertices {
            assert!(k.contains_point(&dvector![v[0], v[1], v[2]]).unwrap());
        }
        for f in &mesh.faces {
            let c: Vec<f64> = (0..3).map(|a| f.iter().map(|&i| mesh.vertices[i][a]).sum::<f64>() / 3.0).collect();
            let c = dvector![c[0], c[1], c[2]];
            let inward = &c * (1.0 + 1e-6);
            let outward = &c * (1.0 - 1e-6);
            assert!(k.contains_point(&inward).unwrap());
            assert!(!k.contains_point(&outward).unwrap());
        }
        assert_eq!(truncated_mesh(&k, 10.0).unwrap(), mesh);
    }

    #[test]
    fn radius_must_clear_the_body() {
        assert!(matches!(truncated_mesh(&five_vertex(), 1.0), Err(ExportError::RadiusTooSmall { .. })));
    }

    #[test]
    fn obj_is_one_based() {
        let mesh = Mesh { vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], faces: vec![[0, 1, 2]] };
        assert_eq!(mesh.to_obj(), "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    }
}
