use nalgebra::DMatrix;

use crate::curvature::SphericalCell;
use crate::linalg::to_vector3;
use crate::pseudocone::HullPseudoCone;
use crate::spherical::EdgeLabel;

/// `∂ area_i / ∂ log g_j` for the cells of `k`.
///
/// Raising `log g_j` moves the bisector between cells `i` and `j` towards `j`
/// with normal speed `|<p_i, v>| / |p_i - p_j|`; integrating along the shared
/// arc from `a` to `b` gives `tan(L/2) |<p_i, a> + <p_i, b>| / |p_i - p_j|`.
/// Rows sum to zero because a common scale leaves the cells unchanged.
pub fn area_jacobian(k: &HullPseudoCone, cells: &[SphericalCell]) -> DMatrix<f64> {
    let m = k.len();
    let points: Vec<_> = (0..m).map(|i| to_vector3(&k.point(i))).collect();
    let mut jac = DMatrix::zeros(m, m);
    for (i, cell) in cells.iter().enumerate() {
        if cell.is_empty() {
            continue;
        }
        let vertices = cell.vertices();
        let labels = cell.polygon().labels();
        let n = vertices.len();
        for e in 0..n {
            let EdgeLabel::Neighbor(j) = labels[e] else { continue };
            let (a, b) = (vertices[e], vertices[(e + 1) % n]);
            let half_tan = a.cross(&b).norm() / (1.0 + a.dot(&b));
            let speed = (points[i].dot(&a) + points[i].dot(&b)).abs() / (points[i] - points[j]).norm();
            jac[(i, j)] += half_tan * speed;
        }
    }
    let sym = (&jac + jac.transpose()) * 0.5;
    let mut jac = sym;
    for i in 0..m {
        jac[(i, i)] = 0.0;
        let off: f64 = (0..m).filter(|&j| j != i).map(|j| jac[(i, j)]).sum();
        jac[(i, i)] = -off;
    }
    jac
}
