//! Orlicz gauges, the entropy `ℰ(K) = -∫_{Ω_{C°}} log h̄_K` and its gradient.

mod gauge;
mod orlicz;
pub mod quadrature;

pub use gauge::{OrliczGauge, SATURATION_MARGIN};
pub use orlicz::{test_grid, OrliczFunction};
pub use quadrature::SphericalTriangle;

use nalgebra::Vector3;
use rand::Rng;
use rayon::prelude::*;

use crate::cone::PointedCone;
use crate::curvature::{self, dual_cap_polygon, CurvatureMeasure, SphericalCell};
use crate::error::{Error, Result};
use crate::linalg::{to_vector3, Vector};
use crate::pseudocone::HullPseudoCone;
use crate::sampling;

/// Default relative tolerance of the entropy quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-9;

/// Cells smaller than this fraction of the cap share its absolute tolerance.
const CELL_TOL_FLOOR: f64 = 1e-4;

/// Minimum angular distance from cell boundaries for the pointwise check.
pub const INTERIOR_DISTANCE: f64 = 1e-3;

/// Triangulation of the Gauss cells of a snapped hull pseudo-cone.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    triangles: Vec<Vec<SphericalTriangle>>,
    cell_areas: Vec<f64>,
    tol: f64,
}

impl QuadratureGrid {
    pub fn build(k: &HullPseudoCone, tol: f64) -> Result<Self> {
        Ok(Self::from_cells(&curvature::gauss_cells(k)?, tol))
    }

    pub fn from_cells(cells: &[SphericalCell], tol: f64) -> Self {
        let triangles = cells
            .iter()
            .map(|cell| cell.polygon().fan().into_iter().map(|[a, b, c]| SphericalTriangle::new(a, b, c)).collect())
            .collect();
        let cell_areas = cells.iter().map(curvature::cell_area).collect();
        Self { triangles, cell_areas, tol }
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn cell_areas(&self) -> &[f64] {
        &self.cell_areas
    }

    pub fn triangles(&self, cell: usize) -> &[SphericalTriangle] {
        &self.triangles[cell]
    }

    pub fn triangle_area_sum(&self) -> f64 {
        self.triangles.iter().flatten().map(SphericalTriangle::area).sum()
    }
}

/// `δ = exp(-1 / area(Ω_{C°})) / 2`, half the lower bound on `b(K)` for
/// entropy-normalized `K`.
pub fn delta_from_cone(dual: &PointedCone) -> Result<f64> {
    Ok(0.5 * entropy_bound(dual)?)
}

/// `λ = exp(-1 / area(Ω_{C°}))`.
pub fn entropy_bound(dual: &PointedCone) -> Result<f64> {
    Ok((-1.0 / dual.cap_area_exact()?).exp())
}

/// `ℰ(K) = -Σ_i [log g_i · area_i + ∫_{cell_i} log|<u_i, v>| dv]`.
pub fn entropy(k: &HullPseudoCone, grid: &QuadratureGrid) -> Result<f64> {
    if !k.is_snapped() {
        return Err(Error::NotSnapped);
    }
    if grid.cell_areas.len() != k.len() {
        return Err(Error::DimensionMismatch { expected: k.len(), found: grid.cell_areas.len() });
    }
    // Tiny cells are integrated to a tolerance relative to the whole cap.
    let floor = CELL_TOL_FLOOR * grid.cell_areas.iter().sum::<f64>();
    let integrals: Vec<Result<f64>> = (0..k.len())
        .into_par_iter()
        .map(|i| {
            if grid.triangles[i].is_empty() {
                return Ok(0.0);
            }
            let u = to_vector3(&k.directions()[i]);
            let abs_tol = grid.tol * grid.cell_areas[i].max(floor);
            quadrature::integrate_triangles(&grid.triangles[i], |v| u.dot(v).abs().ln(), abs_tol)
        })
        .collect();
    let mut total = 0.0;
    for (i, integral) in integrals.into_iter().enumerate() {
        total += k.radials()[i].ln() * grid.cell_areas[i] + integral?;
    }
    Ok(-total)
}

/// Entropy from a triangulation of the whole cap, ignoring the cells.
pub fn entropy_direct(k: &HullPseudoCone, tol: f64) -> Result<f64> {
    if k.dim() != 3 {
        return Err(Error::UnsupportedDimension(k.dim()));
    }
    let cap = dual_cap_polygon(k.cone())?;
    let triangles: Vec<SphericalTriangle> =
        cap.fan().into_iter().map(|[a, b, c]| SphericalTriangle::new(a, b, c)).collect();
    let points: Vec<Vector3<f64>> = (0..k.len()).map(|i| to_vector3(&k.point(i))).collect();
    let integrand =
        |v: &Vector3<f64>| -> f64 { points.iter().map(|p| p.dot(v).abs()).fold(f64::INFINITY, f64::min).ln() };
    Ok(-quadrature::integrate_triangles(&triangles, integrand, tol * cap.area())?)
}

/// `∂(-ℰ)/∂g_i = area_i / g_i`, from masses computed with `ϕ ≡ 1`.
pub fn entropy_gradient(k: &HullPseudoCone, areas: &CurvatureMeasure) -> Result<Vec<f64>> {
    if !k.is_snapped() {
        return Err(Error::NotSnapped);
    }
    if areas.orlicz != OrliczFunction::constant().name() {
        return Err(Error::InvalidArgument(format!("entropy gradient needs ϕ ≡ 1 masses, got {}", areas.orlicz)));
    }
    if areas.masses.len() != k.len() {
        return Err(Error::DimensionMismatch { expected: k.len(), found: areas.masses.len() });
    }
    Ok(gradient_from_areas(k.radials(), &areas.masses))
}

pub(crate) fn gradient_from_areas(radials: &[f64], areas: &[f64]) -> Vec<f64> {
    areas.iter().zip(radials).map(|(a, g)| a / g).collect()
}

/// Radials of the perturbation `φ(f_t) = φ(g) + t · h`.
pub fn perturbed_radials(radials: &[f64], gauge: &OrliczGauge, h: &[f64], t: f64) -> Result<Vec<f64>> {
    radials
        .iter()
        .zip(h)
        .map(|(g, hi)| {
            let y = gauge.value(*g)? + t * hi;
            gauge.inverse(y)
        })
        .collect()
}

fn log_support(k: &HullPseudoCone, radials: &[f64], v: &Vector) -> f64 {
    k.directions().iter().zip(radials).map(|(u, g)| g * u.dot(v).abs()).fold(f64::INFINITY, f64::min).ln()
}

/// Both sides of the pointwise derivative of `t ↦ log h̄_{⟨f_t⟩}(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseDerivative {
    pub owner: usize,
    pub analytic: f64,
    pub finite_difference: f64,
}

impl PointwiseDerivative {
    pub fn relative_error(&self) -> f64 {
        (self.analytic - self.finite_difference).abs() / self.analytic.abs().max(f64::MIN_POSITIVE)
    }
}

/// Compares `h(α*) / (g(α*) φ'(g(α*)))` with a central difference of step `step`,
/// for `v` at least [`INTERIOR_DISTANCE`] inside its cell.
pub fn log_support_derivative_check(
    k: &HullPseudoCone,
    gauge: &OrliczGauge,
    h: &[f64],
    v: &Vector,
    step: f64,
) -> Result<PointwiseDerivative> {
    if h.len() != k.len() {
        return Err(Error::DimensionMismatch { expected: k.len(), found: h.len() });
    }
    let owner = curvature::classify_normal(k, v)?;
    let cell = curvature::gauss_cell(k, owner)?;
    let w = to_vector3(v);
    let distance =
        cell.bounding_normals().iter().map(|(_, n)| (n.dot(&w) / n.norm()).asin()).fold(f64::INFINITY, f64::min);
    if !(distance > INTERIOR_DISTANCE) {
        return Err(Error::NearCellBoundary { distance });
    }
    let g = k.radials()[owner];
    let analytic = h[owner] / (g * gauge.derivative(g));
    let plus = perturbed_radials(k.radials(), gauge, h, step)?;
    let minus = perturbed_radials(k.radials(), gauge, h, -step)?;
    let finite_difference = (log_support(k, &plus, v) - log_support(k, &minus, v)) / (2.0 * step);
    Ok(PointwiseDerivative { owner, analytic, finite_difference })
}

/// Sampled verification of `|log h̄_{⟨f_t⟩}(v) - log h̄_{⟨f_0⟩}(v)| <= M |t|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzCheck {
    pub epsilon: f64,
    pub bound: f64,
    pub worst_ratio: f64,
    pub draws: usize,
}

impl LipschitzCheck {
    pub fn holds(&self) -> bool {
        self.worst_ratio <= self.bound
    }
}

/// Estimates `M = max_i |h_i| · sup_{|t|<=ε} ϕ(f_{t,i})` on a grid of `t` and
/// tests the bound at `draws` random `(v, t)` pairs.
pub fn lipschitz_check(
    k: &HullPseudoCone,
    gauge: &OrliczGauge,
    h: &[f64],
    epsilon: f64,
    draws: usize,
    seed: u64,
) -> Result<LipschitzCheck> {
    if h.len() != k.len() {
        return Err(Error::DimensionMismatch { expected: k.len(), found: h.len() });
    }
    const GRID: usize = 64;
    let mut bound: f64 = 0.0;
    for s in 0..=GRID {
        let t = epsilon * (2.0 * s as f64 / GRID as f64 - 1.0);
        let radials = perturbed_radials(k.radials(), gauge, h, t)?;
        for (f, hi) in radials.iter().zip(h) {
            bound = bound.max(hi.abs() * gauge.base().eval(*f));
        }
    }
    // Slack for ϕ varying between grid points.
    bound *= 1.05;
    let dual = k.cone().dual()?;
    let normals = dual.sample_cap(draws, seed)?.points;
    let mut rng = sampling::stream_rng(seed, u64::MAX - 1);
    let mut worst_ratio: f64 = 0.0;
    for v in &normals {
        let t = epsilon * rng.gen_range(-1.0..1.0);
        if t == 0.0 {
            continue;
        }
        let radials = perturbed_radials(k.radials(), gauge, h, t)?;
        let change = (log_support(k, &radials, v) - log_support(k, k.radials(), v)).abs();
        worst_ratio = worst_ratio.max(change / t.abs());
    }
    Ok(LipschitzCheck { epsilon, bound, worst_ratio, draws: normals.len() })
}
