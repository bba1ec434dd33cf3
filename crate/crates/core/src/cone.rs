//! Pointed polyhedral cones, their duals, and the spherical caps they cut out.
//!
//! A [`PointedCone`] keeps both descriptions of `C`: unit generators (rays) and
//! unit inward facet normals, so that `C = {x : <a_k, x> >= 0}`. The dual cone
//! `C° = {x : <x, y> <= 0 for all y in C}` swaps the two lists up to sign.

use itertools::Itertools;
use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, normalized, rank, to_vector3, Vector};
use crate::sampling::{self, CHUNK};

/// Margin used for strict (open interior) membership tests.
pub const INTERIOR_MARGIN: f64 = 1e-9;

/// Slack allowed in non-strict membership tests.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Largest generator count accepted by facet enumeration.
pub const MAX_GENERATORS: usize = 64;

const SUPPORT_TOL: f64 = 1e-10;
const SAME_DIRECTION_TOL: f64 = 1e-9;
const MIN_ACCEPTANCE: f64 = 1e-4;
const PILOT_DRAWS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PointedCone {
    dim: usize,
    generators: Vec<Vector>,
    facet_normals: Vec<Vector>,
}

impl PointedCone {
    /// Builds a cone from its rays. Redundant (non-extreme) and repeated rays
    /// are dropped; the facet description is recovered by enumerating
    /// supporting hyperplanes spanned by `n - 1` generators.
    pub fn from_generators<I>(generators: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vector>,
    {
        let raw: Vec<Vector> = generators.into_iter().collect();
        let dim = raw.first().ok_or(Error::Empty("generators"))?.len();
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if raw.len() > MAX_GENERATORS {
            return Err(Error::TooManyGenerators { count: raw.len(), limit: MAX_GENERATORS });
        }

        let mut gens: Vec<Vector> = Vec::with_capacity(raw.len());
        for (index, g) in raw.iter().enumerate() {
            if g.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: g.len() });
            }
            let unit = normalized(g).ok_or(Error::DegenerateVector { index })?;
            if !gens.iter().any(|h| (h - &unit).norm() < SAME_DIRECTION_TOL) {
                gens.push(unit);
            }
        }

        let r = rank(&gens, dim, 1e-10);
        if r < dim {
            return Err(Error::RankDeficient { rank: r, dim });
        }

        let facet_normals = enumerate_facets(&gens, dim);
        if facet_normals.is_empty() || rank(&facet_normals, dim, 1e-10) < dim {
            return Err(Error::NotPointed);
        }

        // A generator is extreme iff the facets through it have rank n - 1.
        let generators: Vec<Vector> = gens
            .into_iter()
            .filter(|w| {
                let tight: Vec<Vector> =
                    facet_normals.iter().filter(|a| a.dot(w).abs() <= SUPPORT_TOL).cloned().collect();
                rank(&tight, dim, 1e-10) == dim - 1
            })
            .collect();

        Ok(Self { dim, generators, facet_normals })
    }

    /// Builds a cone from generators and checks a user-supplied facet list
    /// against the recovered one (up to ordering and normalization).
    pub fn with_facets<I, J>(generators: I, facets: J) -> Result<Self>
    where
        I: IntoIterator<Item = Vector>,
        J: IntoIterator<Item = Vector>,
    {
        let cone = Self::from_generators(generators)?;
        let given: Vec<Vector> = facets.into_iter().collect();
        if given.len() != cone.facet_normals.len() {
            return Err(Error::InconsistentFacets(format!(
                "{} facets supplied, {} supporting hyperplanes found",
                given.len(),
                cone.facet_normals.len()
            )));
        }
        for (index, a) in given.iter().enumerate() {
            if a.len() != cone.dim {
                return Err(Error::DimensionMismatch { expected: cone.dim, found: a.len() });
            }
            let unit = normalized(a).ok_or(Error::DegenerateVector { index })?;
            if !cone.facet_normals.iter().any(|b| (b - &unit).norm() < 1e-8) {
                return Err(Error::InconsistentFacets(format!("facet {index} does not support the generators")));
            }
        }
        Ok(cone)
    }

    /// The nonnegative orthant of `R^n`.
    pub fn positive_orthant(dim: usize) -> Result<Self> {
        Self::from_generators((0..dim).map(|k| {
            let mut e = Vector::zeros(dim);
            e[k] = 1.0;
            e
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    pub fn facet_normals(&self) -> &[Vector] {
        &self.facet_normals
    }

    /// Polar cone: generators are the negated facet normals of `self`.
    pub fn dual(&self) -> Result<Self> {
        Self::from_generators(self.facet_normals.iter().map(|a| -a))
    }

    /// `<a_k, x> >= 0` for every facet, or `> INTERIOR_MARGIN` when `strict`.
    pub fn contains(&self, x: &Vector, strict: bool) -> bool {
        if strict {
            self.facet_normals.iter().all(|a| a.dot(x) > INTERIOR_MARGIN)
        } else {
            self.facet_normals.iter().all(|a| a.dot(x) >= -BOUNDARY_TOL)
        }
    }

    /// Membership in the dual cone, tested against the generators of `self`.
    pub fn dual_contains(&self, x: &Vector, strict: bool) -> bool {
        if strict {
            self.generators.iter().all(|w| w.dot(x) < -INTERIOR_MARGIN)
        } else {
            self.generators.iter().all(|w| w.dot(x) <= BOUNDARY_TOL)
        }
    }

    /// Normalized sum of the generators, an interior direction.
    pub fn axis(&self) -> Vector {
        let sum = self.generators.iter().fold(Vector::zeros(self.dim), |acc, w| acc + w);
        normalized(&sum).expect("pointed cone has a nonzero generator sum")
    }

    /// Vertices of the spherical polygon `S^2 ∩ C`, counter-clockwise seen
    /// from outside the sphere.
    pub fn cap_polygon(&self) -> Result<Vec<Vector3<f64>>> {
        if self.dim != 3 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        let axis = to_vector3(&self.axis());
        let helper = if axis.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let e1 = (helper - axis * axis.dot(&helper)).normalize();
        let e2 = axis.cross(&e1);
        let mut verts: Vec<(f64, Vector3<f64>)> = self
            .generators
            .iter()
            .map(|w| {
                let w = to_vector3(w);
                (w.dot(&e2).atan2(w.dot(&e1)), w)
            })
            .collect();
        verts.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(verts.into_iter().map(|(_, w)| w).collect())
    }

    /// Area of `Ω_C = S^2 ∩ int C` by the angle excess of its spherical polygon.
    pub fn cap_area_exact(&self) -> Result<f64> {
        let polygon = self.cap_polygon()?;
        Ok(crate::spherical::angle_excess(&polygon))
    }

    /// Monte Carlo estimate of the cap measure with its standard error, from
    /// `samples` uniform draws on the whole sphere.
    pub fn cap_area_mc(&self, samples: usize, seed: u64) -> Result<(f64, f64)> {
        if samples == 0 {
            return Err(Error::InvalidArgument("sample count must be positive".into()));
        }
        let hits: usize = chunk_ranges(samples)
            .into_par_iter()
            .map(|(chunk, len)| {
                let mut rng = sampling::stream_rng(seed, chunk as u64);
                (0..len).filter(|_| self.contains(&sampling::unit_vector(&mut rng, self.dim), true)).count()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        let total = linalg::sphere_area(self.dim);
        let p = hits as f64 / samples as f64;
        Ok((total * p, total * (p * (1.0 - p) / samples as f64).sqrt()))
    }

    /// Uniform i.i.d. samples on `Ω_C` by rejection from the sphere. Sample
    /// `i` depends only on `(seed, i)`.
    pub fn sample_cap(&self, count: usize, seed: u64) -> Result<CapSample> {
        if count == 0 {
            return Err(Error::InvalidArgument("sample count must be positive".into()));
        }
        let mut pilot = sampling::stream_rng(seed, u64::MAX);
        let pilot_hits =
            (0..PILOT_DRAWS).filter(|_| self.contains(&sampling::unit_vector(&mut pilot, self.dim), true)).count();
        let pilot_rate = pilot_hits as f64 / PILOT_DRAWS as f64;
        if pilot_rate < MIN_ACCEPTANCE {
            return Err(Error::ThinCone { rate: pilot_rate });
        }

        let draws: Vec<(Vector, u64)> = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = sampling::stream_rng(seed, i as u64);
                let mut attempts = 0u64;
                loop {
                    attempts += 1;
                    let v = sampling::unit_vector(&mut rng, self.dim);
                    if self.contains(&v, true) {
                        return (v, attempts);
                    }
                }
            })
            .collect();
        let attempts = draws.iter().map(|(_, a)| a).sum();
        let points = draws.into_iter().map(|(v, _)| v).collect();
        Ok(CapSample { points, attempts })
    }
}

/// Accepted cap samples plus the number of sphere draws it took.
#[derive(Debug, Clone)]
pub struct CapSample {
    pub points: Vec<Vector>,
    pub attempts: u64,
}

impl CapSample {
    pub fn acceptance_rate(&self) -> f64 {
        self.points.len() as f64 / self.attempts as f64
    }
}

/// The open cap `S^{n-1} ∩ int C` of a cone together with its measure.
#[derive(Debug, Clone)]
pub struct SphericalCap {
    cone: PointedCone,
    area: f64,
}

impl SphericalCap {
    /// Exact cap of a three-dimensional cone.
    pub fn exact(cone: PointedCone) -> Result<Self> {
        let area = cone.cap_area_exact()?;
        Ok(Self { cone, area })
    }

    /// Cap whose area is estimated by Monte Carlo (any dimension).
    pub fn estimated(cone: PointedCone, samples: usize, seed: u64) -> Result<Self> {
        let (area, _) = cone.cap_area_mc(samples, seed)?;
        Ok(Self { cone, area })
    }

    pub fn cone(&self) -> &PointedCone {
        &self.cone
    }

    pub fn area(&self) -> f64 {
        self.area
    }
}

pub(crate) fn chunk_ranges(total: usize) -> Vec<(usize, usize)> {
    (0..total.div_ceil(CHUNK)).map(|c| (c, CHUNK.min(total - c * CHUNK))).collect()
}

fn enumerate_facets(gens: &[Vector], dim: usize) -> Vec<Vector> {
    let mut facets: Vec<Vector> = Vec::new();
    for subset in gens.iter().combinations(dim - 1) {
        let raw = linalg::orthogonal_complement(&subset, dim);
        if raw.norm() < 1e-12 {
            continue;
        }
        let normal = raw.normalize();
        let signs: Vec<f64> = gens.iter().map(|w| w.dot(&normal)).collect();
        let candidate = if signs.iter().all(|&s| s >= -SUPPORT_TOL) {
            normal
        } else if signs.iter().all(|&s| s <= SUPPORT_TOL) {
            -normal
        } else {
            continue;
        };
        if !facets.iter().any(|a| (a - &candidate).norm() < SAME_DIRECTION_TOL) {
            facets.push(candidate);
        }
    }
    facets
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;
    use std::f64::consts::PI;

    fn square_cone() -> PointedCone {
        PointedCone::from_generators(vec![
            dvector![1.0, 0.0, 1.0],
            dvector![-1.0, 0.0, 1.0],
            dvector![0.0, 1.0, 1.0],
            dvector![0.0, -1.0, 1.0],
        ])
        .unwrap()
    }

    fn same_set(a: &[Vector], b: &[Vector], tol: f64) -> bool {
        a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| (x - y).norm() < tol))
    }

    #[test]
    fn orthant_dual_is_negative_orthant() {
        let c = PointedCone::positive_orthant(3).unwrap();
        let d = c.dual().unwrap();
        let neg: Vec<Vector> = c.generators().iter().map(|w| -w).collect();
        assert!(same_set(d.generators(), &neg, 1e-12));
        assert!(same_set(d.facet_normals(), &neg, 1e-12));
    }

    #[test]
    fn dual_is_an_involution() {
        for c in [PointedCone::positive_orthant(3).unwrap(), square_cone()] {
            let dd = c.dual().unwrap().dual().unwrap();
            assert!(same_set(dd.generators(), c.generators(), 1e-12));
            assert!(same_set(dd.facet_normals(), c.facet_normals(), 1e-12));
        }
    }

    #[test]
    fn square_cone_dual_by_hand() {
        // Facets of the square cone are spanned by adjacent generators; by
        // polarity, the dual's generators are their negated inward normals and
        // the dual's facet normals are the negated generators.
        let c = square_cone();
        assert_eq!(c.facet_normals().len(), 4);
        let d = c.dual().unwrap();
        let s = 1.0 / 3f64.sqrt();
        let expected: Vec<Vector> = [[1.0, 1.0, -1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, -1.0]]
            .iter()
            .map(|v| dvector![v[0] * s, v[1] * s, v[2] * s])
            .collect();
        assert!(same_set(d.generators(), &expected, 1e-12));
        let neg: Vec<Vector> = c.generators().iter().map(|w| -w).collect();
        assert!(same_set(d.facet_normals(), &neg, 1e-12));
        for w in c.generators() {
            for z in d.generators() {
                assert!(w.dot(z) <= 1e-12);
            }
        }
    }

    #[test]
    fn containment() {
        let c = PointedCone::positive_orthant(3).unwrap();
        assert!(c.contains(&dvector![1.0, 1.0, 1.0], true));
        assert!(!c.contains(&dvector![1.0, 0.0, 1.0], true));
        assert!(c.contains(&dvector![1.0, 0.0, 1.0], false));
        assert!(!c.contains(&dvector![-1.0, 1.0, 1.0], false));
    }

    #[test]
    fn rejects_degenerate_cones() {
        // Half-space: not pointed.
        let half = PointedCone::from_generators(vec![
            dvector![1.0, 0.0, 0.0],
            dvector![-1.0, 0.0, 0.0],
            dvector![0.0, 1.0, 0.0],
            dvector![0.0, -1.0, 0.0],
            dvector![0.0, 0.0, 1.0],
        ]);
        assert_eq!(half.unwrap_err(), Error::NotPointed);
        // Planar generators: rank deficient.
        let flat = PointedCone::from_generators(vec![dvector![1.0, 0.0, 0.0], dvector![0.0, 1.0, 0.0]]);
        assert!(matches!(flat, Err(Error::RankDeficient { rank: 2, dim: 3 })));
        let zero = PointedCone::from_generators(vec![dvector![0.0, 0.0, 0.0]]);
        assert!(matches!(zero, Err(Error::DegenerateVector { index: 0 })));
    }

    #[test]
    fn redundant_generators_are_dropped() {
        let c = PointedCone::from_generators(vec![
            dvector![1.0, 0.0, 0.0],
            dvector![0.0, 1.0, 0.0],
            dvector![0.0, 0.0, 1.0],
            dvector![1.0, 1.0, 1.0],
            dvector![2.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(c.generators().len(), 3);
        assert_eq!(c.facet_normals().len(), 3);
    }

    #[test]
    fn explicit_facets_are_validated() {
        let gens = PointedCone::positive_orthant(3).unwrap().generators().to_vec();
        assert!(PointedCone::with_facets(gens.clone(), gens.clone()).is_ok());
        let wrong = vec![dvector![1.0, 0.0, 0.0], dvector![0.0, 1.0, 0.0], dvector![0.0, 1.0, 1.0]];
        assert!(matches!(PointedCone::with_facets(gens, wrong), Err(Error::InconsistentFacets(_))));
    }

    #[test]
    fn octant_cap_area_is_exact() {
        let d = PointedCone::positive_orthant(3).unwrap().dual().unwrap();
        assert_abs_diff_eq!(d.cap_area_exact().unwrap(), PI / 2.0, epsilon = 1e-12);
        let four = PointedCone::positive_orthant(4).unwrap();
        assert_eq!(four.cap_area_exact().unwrap_err(), Error::UnsupportedDimension(4));
    }

    #[test]
    fn square_dual_cap_exact_matches_mc() {
        let d = square_cone().dual().unwrap();
        let exact = d.cap_area_exact().unwrap();
        let (est, se) = d.cap_area_mc(1_000_000, 11).unwrap();
        assert!((exact - est).abs() <= 4.0 * se, "exact {exact} mc {est} ± {se}");
    }

    #[test]
    fn octant_sampling_rate_and_membership() {
        let d = PointedCone::positive_orthant(3).unwrap().dual().unwrap();
        let sample = d.sample_cap(100_000, 3).unwrap();
        let p = 0.125;
        let n = sample.attempts as f64;
        let sigma = (p * (1.0 - p) / n).sqrt();
        assert!((sample.acceptance_rate() - p).abs() <= 3.0 * sigma);
        assert!(sample.points.iter().all(|v| d.contains(v, true)));
        // The octant cap is symmetric about -(1,1,1)/sqrt(3).
        let count = sample.points.len() as f64;
        let mean = sample.points.iter().fold(Vector::zeros(3), |acc, v| acc + v) / count;
        for (j, k) in [(0, 1), (1, 2), (0, 2)] {
            let diffs: Vec<f64> = sample.points.iter().map(|v| v[j] - v[k]).collect();
            let var = diffs.iter().map(|d| d * d).sum::<f64>() / count - (mean[j] - mean[k]).powi(2);
            assert!((mean[j] - mean[k]).abs() <= 3.0 * (var / count).sqrt());
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = square_cone().dual().unwrap();
        let a = d.sample_cap(500, 99).unwrap();
        let b = d.sample_cap(500, 99).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.attempts, b.attempts);
    }

    #[test]
    fn thin_cones_are_rejected_by_the_sampler() {
        let eps = 2e-3;
        let thin = PointedCone::from_generators(vec![
            dvector![eps, 0.0, 1.0],
            dvector![-eps, 0.0, 1.0],
            dvector![0.0, eps, 1.0],
            dvector![0.0, -eps, 1.0],
        ])
        .unwrap();
        assert!(matches!(thin.sample_cap(10, 1), Err(Error::ThinCone { .. })));
    }
}
