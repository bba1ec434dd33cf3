//! Radial Gauss cells, exact cell areas and the Orlicz-integral Gauss curvature.
//!
//! For a hull pseudo-cone `⟨g⟩` the normals `v ∈ Ω_{C°}` whose supporting
//! point is `g_i u_i` form the spherical cell
//! `{v : <g_i u_i - g_j u_j, v> >= 0 for all j}` of a power-type diagram on the
//! dual cap. The curvature mass of direction `u_i` is `ϕ(g_i)` times the cell area.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::cone::{chunk_ranges, PointedCone};
use crate::error::{Error, Result};
use crate::functional::OrliczFunction;
use crate::linalg::{sphere_area, to_vector3, Vector};
use crate::pseudocone::HullPseudoCone;
use crate::sampling;
use crate::spherical::{EdgeLabel, SphericalPolygon};

/// Gap allowed between the summed cell areas and the cap area.
pub const PARTITION_TOL: f64 = 1e-9;

/// Monte Carlo sample count used when exact cells are unavailable (n > 3).
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

/// Radial Gauss image of one direction, as a spherical polygon.
#[derive(Debug, Clone)]
pub struct SphericalCell {
    owner: usize,
    polygon: SphericalPolygon,
    normals: Vec<(EdgeLabel, Vector3<f64>)>,
}

impl SphericalCell {
    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        self.polygon.vertices()
    }

    pub fn polygon(&self) -> &SphericalPolygon {
        &self.polygon
    }

    /// Great-circle normals of the edges that actually bound the cell.
    pub fn bounding_normals(&self) -> &[(EdgeLabel, Vector3<f64>)] {
        &self.normals
    }

    pub fn is_empty(&self) -> bool {
        self.polygon.is_empty()
    }

    pub fn contains(&self, v: &Vector3<f64>, tol: f64) -> bool {
        self.polygon.contains(v, tol)
    }
}

/// Angle-excess area of a cell; zero for empty cells.
pub fn cell_area(cell: &SphericalCell) -> f64 {
    cell.polygon.area()
}

/// How a [`CurvatureMeasure`] was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureMethod {
    Exact,
    MonteCarlo { samples: usize, std_errors: Vec<f64> },
}

/// Per-direction masses `m_i = J_ϕ(K, {u_i})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureMeasure {
    pub masses: Vec<f64>,
    pub total: f64,
    pub method: MeasureMethod,
    pub orlicz: String,
}

impl CurvatureMeasure {
    fn new(masses: Vec<f64>, method: MeasureMethod, orlicz: String) -> Self {
        let total = masses.iter().sum();
        Self { masses, total, method, orlicz }
    }
}

/// Spherical polygon of the open cap `Ω_{C°}`, with edges labelled by the
/// generator of `C` whose orthogonal great circle carries them.
pub(crate) fn dual_cap_polygon(cone: &PointedCone) -> Result<SphericalPolygon> {
    let dual = cone.dual()?;
    let vertices = dual.cap_polygon()?;
    let gens: Vec<Vector3<f64>> = cone.generators().iter().map(to_vector3).collect();
    let k = vertices.len();
    let labels = (0..k)
        .map(|e| {
            let (a, b) = (vertices[e], vertices[(e + 1) % k]);
            let j = (0..gens.len())
                .min_by(|&x, &y| {
                    let sx = gens[x].dot(&a).abs() + gens[x].dot(&b).abs();
                    let sy = gens[y].dot(&a).abs() + gens[y].dot(&b).abs();
                    sx.total_cmp(&sy)
                })
                .expect("cone has generators");
            EdgeLabel::Cap(j)
        })
        .collect();
    Ok(SphericalPolygon::new(vertices, labels))
}

fn require_exact(k: &HullPseudoCone) -> Result<()> {
    if k.dim() != 3 {
        return Err(Error::UnsupportedDimension(k.dim()));
    }
    if !k.is_snapped() {
        return Err(Error::NotSnapped);
    }
    Ok(())
}

fn build_cell(k: &HullPseudoCone, cap: &SphericalPolygon, i: usize) -> SphericalCell {
    let pi = to_vector3(&k.point(i));
    let mut polygon = cap.clone();
    for j in 0..k.len() {
        if j == i || polygon.is_empty() {
            continue;
        }
        let normal = pi - to_vector3(&k.point(j));
        polygon = polygon.clip(&normal, EdgeLabel::Neighbor(j));
    }
    let gens: Vec<Vector3<f64>> = k.cone().generators().iter().map(to_vector3).collect();
    let mut normals: Vec<(EdgeLabel, Vector3<f64>)> = Vec::new();
    if !polygon.is_empty() {
        for label in polygon.labels() {
            if normals.iter().any(|(l, _)| l == label) {
                continue;
            }
            let n = match *label {
                EdgeLabel::Cap(j) => -gens[j],
                EdgeLabel::Neighbor(j) => pi - to_vector3(&k.point(j)),
            };
            normals.push((*label, n));
        }
    }
    SphericalCell { owner: i, polygon, normals }
}

/// Cell of direction `i`: the dual cap clipped by the bisecting great circles.
pub fn gauss_cell(k: &HullPseudoCone, i: usize) -> Result<SphericalCell> {
    require_exact(k)?;
    if i >= k.len() {
        return Err(Error::IndexOutOfRange { index: i, len: k.len() });
    }
    let cap = dual_cap_polygon(k.cone())?;
    Ok(build_cell(k, &cap, i))
}

/// All cells, evaluated in parallel and returned in index order.
pub fn gauss_cells(k: &HullPseudoCone) -> Result<Vec<SphericalCell>> {
    require_exact(k)?;
    let cap = dual_cap_polygon(k.cone())?;
    Ok((0..k.len()).into_par_iter().map(|i| build_cell(k, &cap, i)).collect())
}

/// Cells without the snapped check; empty for points interior to the hull.
pub(crate) fn gauss_cells_unchecked(k: &HullPseudoCone) -> Result<Vec<SphericalCell>> {
    if k.dim() != 3 {
        return Err(Error::UnsupportedDimension(k.dim()));
    }
    let cap = dual_cap_polygon(k.cone())?;
    Ok((0..k.len()).into_par_iter().map(|i| build_cell(k, &cap, i)).collect())
}

/// Exact cell areas in index order.
pub fn cell_areas(k: &HullPseudoCone) -> Result<Vec<f64>> {
    Ok(gauss_cells(k)?.iter().map(cell_area).collect())
}

/// `J_ϕ(K, {u_i}) = ϕ(g_i) · area(cell_i)`; Monte Carlo when `n > 3`.
pub fn curvature_measure(k: &HullPseudoCone, phi: &OrliczFunction) -> Result<CurvatureMeasure> {
    if k.dim() != 3 {
        return curvature_measure_mc(k, phi, DEFAULT_MC_SAMPLES, 0);
    }
    let areas = cell_areas(k)?;
    Ok(measure_from_areas(k, phi, &areas))
}

pub(crate) fn measure_from_areas(k: &HullPseudoCone, phi: &OrliczFunction, areas: &[f64]) -> CurvatureMeasure {
    let masses = areas.iter().zip(k.radials()).map(|(a, g)| phi.eval(*g) * a).collect();
    CurvatureMeasure::new(masses, MeasureMethod::Exact, phi.name())
}

/// Reverse radial Gauss map: `argmax_i g_i <u_i, v>`, lowest index on ties.
pub fn classify_normal(k: &HullPseudoCone, v: &Vector) -> Result<usize> {
    if v.len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), found: v.len() });
    }
    if !k.cone().dual_contains(v, true) {
        return Err(Error::OutsideDualCap);
    }
    Ok(classify_unchecked(k, v))
}

pub(crate) fn classify_unchecked(k: &HullPseudoCone, v: &Vector) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, (u, g)) in k.directions().iter().zip(k.radials()).enumerate() {
        let value = g * u.dot(v);
        if value > best_value {
            best_value = value;
            best = i;
        }
    }
    best
}

/// Monte Carlo masses with per-direction standard errors. In three dimensions
/// the cap is sampled directly and scaled by its exact area; otherwise the
/// whole sphere is sampled.
pub fn curvature_measure_mc(
    k: &HullPseudoCone,
    phi: &OrliczFunction,
    samples: usize,
    seed: u64,
) -> Result<CurvatureMeasure> {
    let (counts, drawn, scale) = classify_counts(k, samples, seed)?;
    let mut masses = Vec::with_capacity(k.len());
    let mut std_errors = Vec::with_capacity(k.len());
    for (count, g) in counts.iter().zip(k.radials()) {
        let p = *count as f64 / drawn as f64;
        let weight = phi.eval(*g) * scale;
        masses.push(weight * p);
        std_errors.push(weight * (p * (1.0 - p) / drawn as f64).sqrt());
    }
    Ok(CurvatureMeasure::new(masses, MeasureMethod::MonteCarlo { samples, std_errors }, phi.name()))
}

/// Returns per-index hit counts, the number of draws they came from, and the
/// measure that one draw represents in total.
fn classify_counts(k: &HullPseudoCone, samples: usize, seed: u64) -> Result<(Vec<usize>, usize, f64)> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let m = k.len();
    if k.dim() == 3 {
        let dual = k.cone().dual()?;
        let area = dual.cap_area_exact()?;
        let sample = dual.sample_cap(samples, seed)?;
        let counts = sample
            .points
            .par_chunks(sampling::CHUNK)
            .map(|chunk| {
                let mut c = vec![0usize; m];
                for v in chunk {
                    c[classify_unchecked(k, v)] += 1;
                }
                c
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(vec![0usize; m], |mut acc, c| {
                acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
                acc
            });
        Ok((counts, samples, area))
    } else {
        let dim = k.dim();
        let counts = chunk_ranges(samples)
            .into_par_iter()
            .map(|(chunk, len)| {
                let mut rng = sampling::stream_rng(seed, chunk as u64);
                let mut c = vec![0usize; m];
                for _ in 0..len {
                    let v = sampling::unit_vector(&mut rng, dim);
                    if k.cone().dual_contains(&v, true) {
                        c[classify_unchecked(k, &v)] += 1;
                    }
                }
                c
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(vec![0usize; m], |mut acc, c| {
                acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
                acc
            });
        Ok((counts, samples, sphere_area(dim)))
    }
}

/// Monte Carlo estimate of `∫_{Ω_{C°}} f(α*(v)) ϕ(ρ_K(α*(v))) dv`, which equals
/// `Σ_i f(u_i) m_i`. `f` receives the index and the direction `u_i`.
pub fn pullback_integral_mc<F>(
    k: &HullPseudoCone,
    phi: &OrliczFunction,
    f: F,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)>
where
    F: Fn(usize, &Vector) -> f64,
{
    if !k.is_snapped() {
        return Err(Error::NotSnapped);
    }
    let (counts, drawn, scale) = classify_counts(k, samples, seed)?;
    let values: Vec<f64> = (0..k.len()).map(|i| f(i, &k.directions()[i]) * phi.eval(k.radials()[i])).collect();
    let n = drawn as f64;
    let mean: f64 = counts.iter().zip(&values).map(|(c, x)| *c as f64 * x).sum::<f64>() / n;
    let second: f64 = counts.iter().zip(&values).map(|(c, x)| *c as f64 * x * x).sum::<f64>() / n;
    let var = (second - mean * mean).max(0.0);
    Ok((scale * mean, scale * (var / n).sqrt()))
}

/// Outcome of comparing the summed cell areas with the cap area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Concentration {
    pub captured: f64,
    pub cap_area: f64,
    pub gap: f64,
}

impl Concentration {
    pub fn holds(&self) -> bool {
        self.gap <= PARTITION_TOL
    }
}

/// Checks that the cells of the finite direction set exhaust the dual cap.
pub fn concentration_check(k: &HullPseudoCone) -> Result<Concentration> {
    let captured: f64 = cell_areas(k)?.iter().sum();
    let cap_area = k.cone().dual()?.cap_area_exact()?;
    Ok(Concentration { captured, cap_area, gap: (captured - cap_area).abs() })
}
