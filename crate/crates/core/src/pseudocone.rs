//! C-pseudo-cones in convex-hull form `⟨g⟩` and Wulff form `[f]`.
//!
//! A hull pseudo-cone over `C` is `conv(⋃ (g_i u_i + C))` for finitely many
//! interior directions `u_i`; a Wulff pseudo-cone is `C ∩ ⋂ {<x, v_j> <= -f_j}`.
//! Copolarity `K* = {x : <x, y> <= -1 for all y in K}` exchanges the two forms:
//! `⟨g⟩* = [1/g]` over the dual cone.

use itertools::Itertools;
use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use nalgebra::{DMatrix, DVector};

use crate::cone::PointedCone;
use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Accepted deviation from unit length for input directions.
pub const UNIT_TOL: f64 = 1e-9;

/// Minimum distance between two directions of the same body.
pub const DISTINCT_TOL: f64 = 1e-8;

const COEFF_TOL: f64 = 1e-12;

/// Hull-form pseudo-cone `⟨g⟩`: the solver's unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct HullPseudoCone {
    cone: PointedCone,
    directions: Vec<Vector>,
    radials: Vec<f64>,
    snapped: bool,
}

impl HullPseudoCone {
    pub fn new(cone: PointedCone, directions: Vec<Vector>, radials: Vec<f64>) -> Result<Self> {
        let directions = validate_directions(&directions, cone.dim(), |u| cone.contains(u, true))?;
        if radials.len() != directions.len() {
            return Err(Error::DimensionMismatch { expected: directions.len(), found: radials.len() });
        }
        validate_positive(&radials)?;
        Ok(Self { cone, directions, radials, snapped: false })
    }

    pub fn cone(&self) -> &PointedCone {
        &self.cone
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    pub fn directions(&self) -> &[Vector] {
        &self.directions
    }

    pub fn radials(&self) -> &[f64] {
        &self.radials
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Whether every `g_i` equals `ρ_K(u_i)`, i.e. the body is C-defined by
    /// its own direction set.
    pub fn is_snapped(&self) -> bool {
        self.snapped
    }

    /// The point `g_i u_i`.
    pub fn point(&self, i: usize) -> Vector {
        &self.directions[i] * self.radials[i]
    }

    /// `s K`; snapping is preserved since `ρ_{sK} = s ρ_K`.
    pub fn scaled(&self, s: f64) -> Self {
        assert!(s > 0.0 && s.is_finite(), "scale must be positive");
        Self {
            cone: self.cone.clone(),
            directions: self.directions.clone(),
            radials: self.radials.iter().map(|g| g * s).collect(),
            snapped: self.snapped,
        }
    }

    /// Radials already known to equal `ρ_K(u_i)`; not validated.
    pub(crate) fn with_snapped_radials(&self, radials: Vec<f64>) -> Self {
        Self { cone: self.cone.clone(), directions: self.directions.clone(), radials, snapped: true }
    }

    /// Same directions with new radial values (not snapped).
    pub fn with_radials(&self, radials: Vec<f64>) -> Result<Self> {
        if radials.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: radials.len() });
        }
        validate_positive(&radials)?;
        Ok(Self { cone: self.cone.clone(), directions: self.directions.clone(), radials, snapped: false })
    }

    /// `h̄_K(v) = min_i g_i |<u_i, v>|` for `v` in the closed dual cap.
    pub fn support_bar(&self, v: &Vector) -> Result<f64> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        if !self.cone.dual_contains(v, false) {
            return Err(Error::OutsideDualCap);
        }
        Ok(self.support_bar_unchecked(v))
    }

    pub(crate) fn support_bar_unchecked(&self, v: &Vector) -> f64 {
        self.directions.iter().zip(&self.radials).map(|(u, g)| -g * u.dot(v)).fold(f64::INFINITY, f64::min)
    }

    /// `ρ_K(u) = min {r > 0 : r u ∈ K}` via the linear program
    /// `min r  s.t.  r u = Σ λ_i g_i u_i + Σ ν_j w_j,  λ in the simplex,  ν >= 0`.
    pub fn radial(&self, u: &Vector) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        if !self.cone.contains(u, true) {
            return Err(Error::OutsideCap);
        }
        let points: Vec<Vector> = (0..self.len()).map(|i| self.point(i)).collect();
        radial_program(u, &points, self.cone.generators())
    }

    /// Whether `x ∈ K` (linear feasibility over the hull parametrization).
    pub fn contains_point(&self, x: &Vector) -> Result<bool> {
        let n = self.dim();
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let lambdas: Vec<Variable> = (0..self.len()).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
        let nus: Vec<Variable> =
            (0..self.cone.generators().len()).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
        for c in 0..n {
            let mut row: Vec<(Variable, f64)> = Vec::new();
            for (i, l) in lambdas.iter().enumerate() {
                row.push((*l, self.point(i)[c]));
            }
            for (w, v) in self.cone.generators().iter().zip(&nus) {
                row.push((*v, w[c]));
            }
            lp.add_constraint(row.as_slice(), ComparisonOp::Eq, x[c]);
        }
        let simplex: Vec<(Variable, f64)> = lambdas.iter().map(|l| (*l, 1.0)).collect();
        lp.add_constraint(simplex.as_slice(), ComparisonOp::Eq, 1.0);
        match lp.solve() {
            Ok(_) => Ok(true),
            Err(minilp::Error::Infeasible) => Ok(false),
            Err(e) => Err(Error::LinearProgram(e.to_string())),
        }
    }

    /// The copolar set `K* = C° ∩ ⋂_i {x : <x, u_i> <= -1/g_i}` in Wulff form.
    pub fn copolar(&self) -> Result<WulffPseudoCone> {
        WulffPseudoCone::new(self.cone.dual()?, self.directions.clone(), self.radials.iter().map(|g| 1.0 / g).collect())
    }

    /// `b(K) = dist(o, K)`.
    ///
    /// The nearest point lies in the relative interior of a face spanned by at
    /// most `n` affinely independent atoms (points `g_i u_i` or rays `w_j`, at
    /// least one point). For every such atom set the origin is projected onto
    /// the affine-conic span; feasible projections are points of `K` and the
    /// optimal face produces the global minimizer, so the least feasible norm is
    /// exact.
    pub fn distance_origin(&self) -> f64 {
        let n = self.dim();
        let points: Vec<Vector> = (0..self.len()).map(|i| self.point(i)).collect();
        let rays = self.cone.generators();
        let atoms = points.len() + rays.len();
        let mut best = points.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
        for size in 2..=n.min(atoms) {
            for subset in (0..atoms).combinations(size) {
                let Some(&anchor) = subset.iter().find(|&&a| a < points.len()) else {
                    continue;
                };
                let base = &points[anchor];
                let others: Vec<usize> = subset.iter().copied().filter(|&a| a != anchor).collect();
                let columns: Vec<Vector> = others
                    .iter()
                    .map(|&a| if a < points.len() { &points[a] - base } else { rays[a - points.len()].clone() })
                    .collect();
                if crate::linalg::rank(&columns, n, 1e-10) < columns.len() {
                    continue;
                }
                let b = DMatrix::from_fn(n, columns.len(), |r, c| columns[c][r]);
                let Some(chol) = (b.transpose() * &b).cholesky() else { continue };
                let coeff = chol.solve(&(-(b.transpose() * base)));
                let mut anchor_weight = 1.0;
                let mut feasible = true;
                for (k, &a) in others.iter().enumerate() {
                    if coeff[k] < -COEFF_TOL {
                        feasible = false;
                        break;
                    }
                    if a < points.len() {
                        anchor_weight -= coeff[k];
                    }
                }
                if !feasible || anchor_weight < -COEFF_TOL {
                    continue;
                }
                let x = base + &b * &coeff;
                best = best.min(x.norm());
            }
        }
        best
    }

    /// Replaces each `g_i` by `ρ_K(u_i) <= g_i`; the set itself is unchanged.
    pub fn snap_to_radial(&self) -> Result<Self> {
        let mut radials = Vec::with_capacity(self.len());
        for (u, g) in self.directions.iter().zip(&self.radials) {
            radials.push(self.radial(u)?.min(*g));
        }
        Ok(Self { cone: self.cone.clone(), directions: self.directions.clone(), radials, snapped: true })
    }
}

/// Wulff-form pseudo-cone `[f]` over `C` with normals in `int C°`.
#[derive(Debug, Clone, PartialEq)]
pub struct WulffPseudoCone {
    cone: PointedCone,
    normals: Vec<Vector>,
    offsets: Vec<f64>,
}

impl WulffPseudoCone {
    pub fn new(cone: PointedCone, normals: Vec<Vector>, offsets: Vec<f64>) -> Result<Self> {
        let normals = validate_directions(&normals, cone.dim(), |v| cone.dual_contains(v, true))?;
        if offsets.len() != normals.len() {
            return Err(Error::DimensionMismatch { expected: normals.len(), found: offsets.len() });
        }
        validate_positive(&offsets)?;
        Ok(Self { cone, normals, offsets })
    }

    pub fn cone(&self) -> &PointedCone {
        &self.cone
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Smallest `r` with `r u` satisfying every constraint: `max_j f_j / |<u, v_j>|`.
    pub fn radial(&self, u: &Vector) -> Result<f64> {
        if u.len() != self.cone.dim() {
            return Err(Error::DimensionMismatch { expected: self.cone.dim(), found: u.len() });
        }
        if !self.cone.contains(u, true) {
            return Err(Error::OutsideCap);
        }
        Ok(self.normals.iter().zip(&self.offsets).map(|(v, f)| f / u.dot(v).abs()).fold(0.0, f64::max))
    }

    /// `[f]* = ⟨1/f⟩` over the dual cone.
    pub fn copolar(&self) -> Result<HullPseudoCone> {
        HullPseudoCone::new(self.cone.dual()?, self.normals.clone(), self.offsets.iter().map(|f| 1.0 / f).collect())
    }

    /// `h̄_K(v) = 1 / ρ_{K*}(v)` through the copolar hull form.
    pub fn support_bar(&self, v: &Vector) -> Result<f64> {
        Ok(1.0 / self.copolar()?.radial(v)?)
    }
}

pub(crate) fn validate_directions(
    dirs: &[Vector],
    dim: usize,
    inside: impl Fn(&Vector) -> bool,
) -> Result<Vec<Vector>> {
    if dirs.is_empty() {
        return Err(Error::Empty("directions"));
    }
    let mut out: Vec<Vector> = Vec::with_capacity(dirs.len());
    for (index, d) in dirs.iter().enumerate() {
        if d.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: d.len() });
        }
        let norm = d.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitDirection { index, norm });
        }
        let unit = d / norm;
        if !inside(&unit) {
            return Err(Error::DirectionOutsideCone { index });
        }
        if let Some(first) = out.iter().position(|e| (e - &unit).norm() <= DISTINCT_TOL) {
            return Err(Error::DuplicateDirection { first, second: index });
        }
        out.push(unit);
    }
    Ok(out)
}

fn validate_positive(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        Some(index) => Err(Error::NonPositiveValue { index, value: values[index] }),
        None => Ok(()),
    }
}

fn radial_program(u: &Vector, points: &[Vector], rays: &[Vector]) -> Result<f64> {
    let n = u.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let r = lp.add_var(1.0, (0.0, f64::INFINITY));
    let lambdas: Vec<Variable> = points.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let nus: Vec<Variable> = rays.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for c in 0..n {
        let mut row: Vec<(Variable, f64)> = vec![(r, u[c])];
        row.extend(lambdas.iter().zip(points).map(|(l, p)| (*l, -p[c])));
        row.extend(nus.iter().zip(rays).map(|(v, w)| (*v, -w[c])));
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, 0.0);
    }
    let simplex: Vec<(Variable, f64)> = lambdas.iter().map(|l| (*l, 1.0)).collect();
    lp.add_constraint(simplex.as_slice(), ComparisonOp::Eq, 1.0);
    let solution = lp.solve().map_err(|e| Error::LinearProgram(e.to_string()))?;
    let lp_value = solution[r];

    // Re-solve the equality system on the optimal support to recover full precision.
    let active_points: Vec<usize> = (0..points.len()).filter(|&i| solution[lambdas[i]] > COEFF_TOL).collect();
    let active_rays: Vec<usize> = (0..rays.len()).filter(|&j| solution[nus[j]] > COEFF_TOL).collect();
    let cols = 1 + active_points.len() + active_rays.len();
    let mut m = DMatrix::zeros(n + 1, cols);
    for c in 0..n {
        m[(c, 0)] = u[c];
        for (k, &i) in active_points.iter().enumerate() {
            m[(c, 1 + k)] = -points[i][c];
        }
        for (k, &j) in active_rays.iter().enumerate() {
            m[(c, 1 + active_points.len() + k)] = -rays[j][c];
        }
    }
    for k in 0..active_points.len() {
        m[(n, 1 + k)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    let svd = m.clone().svd(true, true);
    if let Ok(x) = svd.solve(&rhs, 1e-13) {
        let residual = (&m * &x - &rhs).norm();
        if residual < 1e-12 && x.iter().all(|&c| c > -COEFF_TOL) && (x[0] - lp_value).abs() <= 1e-8 * lp_value.max(1.0)
        {
            return Ok(x[0]);
        }
    }
    Ok(lp_value)
}
