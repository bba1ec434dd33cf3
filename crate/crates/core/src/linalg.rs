//! Small dense helpers shared by the geometric modules.

use nalgebra::{DMatrix, DVector, Vector3};

pub type Vector = DVector<f64>;

pub fn normalized(v: &Vector) -> Option<Vector> {
    let norm = v.norm();
    if norm.is_finite() && norm > 1e-300 {
        Some(v / norm)
    } else {
        None
    }
}

pub fn to_vector3(v: &Vector) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

pub fn from_vector3(v: &Vector3<f64>) -> Vector {
    DVector::from_column_slice(v.as_slice())
}

/// Numerical rank of the matrix whose columns are `vectors`.
pub fn rank(vectors: &[Vector], dim: usize, tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(dim, vectors.len(), |r, c| vectors[c][r]);
    let sv = m.singular_values();
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * largest.max(1.0)).count()
}

/// Generalized cross product: a vector orthogonal to the `n - 1` given vectors
/// in `R^n`, computed from signed cofactors. Its norm is the volume spanned.
pub fn orthogonal_complement(vectors: &[&Vector], dim: usize) -> Vector {
    debug_assert_eq!(vectors.len() + 1, dim);
    let mut out = DVector::zeros(dim);
    if dim == 2 {
        out[0] = -vectors[0][1];
        out[1] = vectors[0][0];
        return out;
    }
    if dim == 3 {
        let a = to_vector3(vectors[0]);
        let b = to_vector3(vectors[1]);
        return from_vector3(&a.cross(&b));
    }
    for k in 0..dim {
        let minor = DMatrix::from_fn(dim - 1, dim - 1, |r, c| {
            let col = if c < k { c } else { c + 1 };
            vectors[r][col]
        });
        let sign = if (k + dim - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        out[k] = sign * minor.determinant();
    }
    out
}

/// Surface measure of the unit sphere `S^{n-1}` in `R^n`.
pub fn sphere_area(dim: usize) -> f64 {
    use std::f64::consts::PI;
    // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2), with Gamma at integers and half-integers.
    let half = dim as f64 / 2.0;
    let gamma = if dim.is_multiple_of(2) {
        (1..dim / 2).map(|k| k as f64).product::<f64>()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < half {
            g *= x;
            x += 1.0;
        }
        g
    };
    2.0 * PI.powf(half) / gamma
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn complement_is_orthogonal() {
        let a = DVector::from_vec(vec![1.0, 2.0, 0.5, -1.0]);
        let b = DVector::from_vec(vec![0.0, 1.0, 3.0, 2.0]);
        let c = DVector::from_vec(vec![-1.0, 0.0, 1.0, 1.0]);
        let n = orthogonal_complement(&[&a, &b, &c], 4);
        assert!(n.norm() > 1e-6);
        for v in [&a, &b, &c] {
            assert!(n.dot(v).abs() < 1e-12);
        }
    }
}
