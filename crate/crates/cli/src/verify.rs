//! Property battery behind the `verify` command.

use std::f64::consts::PI;

use conecurve_core::curvature::{self, MeasureMethod};
use conecurve_core::functional::{self, OrliczGauge, QuadratureGrid};
use conecurve_core::{HullPseudoCone, OrliczFunction, PointedCone, Vector};
use itertools::Itertools;
use nalgebra::{dvector, Matrix3, Vector3};

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }

    fn failed(name: &str, err: impl std::fmt::Display) -> Self {
        Self::new(name, false, format!("error: {err}"))
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub const FIXTURES: [&str; 3] = ["k1", "five-vertex", "random-12"];

pub fn fixture(name: &str) -> Option<HullPseudoCone> {
    let cone = PointedCone::positive_orthant(3).ok()?;
    let (directions, radials): (Vec<Vector>, Vec<f64>) = match name {
        "k1" => (vec![dvector![1.0, 1.0, 1.0].normalize()], vec![3f64.sqrt()]),
        "five-vertex" => (
            vec![
                dvector![1.0, 1.0, 1.0].normalize(),
                dvector![3.0, 1.0, 1.0].normalize(),
                dvector![1.0, 3.0, 1.0].normalize(),
                dvector![1.0, 1.0, 3.0].normalize(),
                dvector![2.0, 2.0, 1.0].normalize(),
            ],
            vec![1.2, 1.5, 1.45, 1.55, 1.3],
        ),
        "random-12" => {
            // Fixed low-discrepancy directions and radials in [1, 2].
            let dirs = (0..12)
                .map(|i| {
                    let t = i as f64;
                    let a = 0.15 + 0.7 * ((t * 0.618_034) % 1.0);
                    let b = 0.15 + 0.7 * ((t * 0.414_214 + 0.3) % 1.0);
                    dvector![a, b, 0.5 + 0.4 * ((t * 0.732_051) % 1.0)].normalize()
                })
                .collect();
            let radials = (0..12).map(|i| 1.0 + ((i as f64 * 0.381_966 + 0.1) % 1.0)).collect();
            (dirs, radials)
        }
        _ => return None,
    };
    HullPseudoCone::new(cone, directions, radials).ok()?.snap_to_radial().ok()
}

/// `h̄_{K*}(u)` by enumerating the vertices of
/// `K* = {x : <x, w_j> <= 0, <x, p_i> <= -1}`.
pub fn copolar_support_brute(k: &HullPseudoCone, u: &Vector3<f64>) -> f64 {
    let mut planes: Vec<(Vector3<f64>, f64)> = (0..k.len())
        .map(|i| {
            let p = k.point(i);
            (Vector3::new(p[0], p[1], p[2]), -1.0)
        })
        .collect();
    let atoms = planes.len();
    planes.extend(k.cone().generators().iter().map(|w| (Vector3::new(w[0], w[1], w[2]), 0.0)));
    let mut best = f64::NEG_INFINITY;
    for triple in (0..planes.len()).combinations(3) {
        if triple.iter().all(|&t| t >= atoms) {
            continue;
        }
        let m = Matrix3::from_rows(&[
            planes[triple[0]].0.transpose(),
            planes[triple[1]].0.transpose(),
            planes[triple[2]].0.transpose(),
        ]);
        let rhs = Vector3::new(planes[triple[0]].1, planes[triple[1]].1, planes[triple[2]].1);
        let Some(x) = m.lu().solve(&rhs) else { continue };
        if planes.iter().all(|(n, b)| n.dot(&x) <= b + 1e-10 * (1.0 + x.norm())) {
            best = best.max(u.dot(&x));
        }
    }
    -best
}

fn entropy_of(k: &HullPseudoCone) -> conecurve_core::Result<f64> {
    functional::entropy(k, &QuadratureGrid::build(k, 1e-12)?)
}

fn directions_in_cap(cone: &PointedCone, count: usize, seed: u64) -> conecurve_core::Result<Vec<Vector>> {
    Ok(cone.sample_cap(count, seed)?.points)
}

pub fn duality(k: &HullPseudoCone, seed: u64) -> Check {
    let run = || -> conecurve_core::Result<(f64, f64)> {
        let mut worst: f64 = 0.0;
        for u in directions_in_cap(k.cone(), 100, seed)? {
            let rho = k.radial(&u)?;
            let hbar = copolar_support_brute(k, &Vector3::new(u[0], u[1], u[2]));
            worst = worst.max((rho * hbar - 1.0).abs());
        }
        let star = k.copolar()?;
        let mut involution: f64 = 0.0;
        for v in directions_in_cap(&k.cone().dual()?, 100, seed.wrapping_add(1))? {
            involution = involution.max((k.support_bar(&v)? * star.radial(&v)? - 1.0).abs());
            let back = star.copolar()?;
            involution = involution.max((back.support_bar(&v)? - k.support_bar(&v)?).abs());
        }
        Ok((worst, involution))
    };
    match run() {
        Ok((a, b)) => Check::new(
            "duality",
            a <= 1e-9 && b <= 1e-9,
            format!("max |ρ_K h̄_K* - 1| = {a:.3e}, max copolar mismatch = {b:.3e} (tol 1e-9)"),
        ),
        Err(e) => Check::failed("duality", e),
    }
}

pub fn partition(k: &HullPseudoCone) -> Check {
    match curvature::concentration_check(k) {
        Ok(c) => {
            let mut detail =
                format!("Σ areas = {:.15} vs cap {:.15}, gap {:.3e} (tol 1e-9)", c.captured, c.cap_area, c.gap);
            let mut passed = c.gap <= 1e-9;
            if *k.cone() == PointedCone::positive_orthant(3).expect("orthant") {
                let octant = (c.cap_area - PI / 2.0).abs();
                detail.push_str(&format!("; octant cap - π/2 = {octant:.3e} (tol 1e-12)"));
                passed &= octant <= 1e-12;
            }
            Check::new("partition", passed, detail)
        }
        Err(e) => Check::failed("partition", e),
    }
}

pub fn scaling(k: &HullPseudoCone) -> Check {
    let run = || -> conecurve_core::Result<f64> {
        let base = entropy_of(k)?;
        let cap = k.cone().dual()?.cap_area_exact()?;
        let mut worst: f64 = 0.0;
        for s in [0.5, 2.0, 7.0] {
            let scaled = entropy_of(&k.scaled(s))?;
            worst = worst.max((scaled - base + cap * f64::ln(s)).abs());
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Check::new("scaling", w <= 1e-8, format!("max |ℰ(sK) - ℰ(K) + A log s| = {w:.3e} (tol 1e-8)")),
        Err(e) => Check::failed("scaling", e),
    }
}

pub fn gradient(k: &HullPseudoCone) -> Check {
    let run = || -> conecurve_core::Result<f64> {
        let measure = curvature::curvature_measure(k, &OrliczFunction::constant())?;
        let analytic = functional::entropy_gradient(k, &measure)?;
        let h = 1e-3;
        let mut worst: f64 = 0.0;
        for i in 0..k.len() {
            let shifted = |delta: f64| -> conecurve_core::Result<f64> {
                let mut g = k.radials().to_vec();
                g[i] += delta;
                entropy_of(&k.with_radials(g)?.snap_to_radial()?)
            };
            let fd = -(shifted(h)? - shifted(-h)?) / (2.0 * h);
            let scale = analytic[i].abs().max(1e-12);
            worst = worst.max((fd - analytic[i]).abs() / scale);
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Check::new("gradient", w <= 5e-4, format!("max relative FD error = {w:.3e} at h = 1e-3 (tol 5e-4)")),
        Err(e) => Check::failed("gradient", e),
    }
}

pub fn monte_carlo(k: &HullPseudoCone, phi: &OrliczFunction, samples: usize, seed: u64) -> Check {
    let run = || -> conecurve_core::Result<f64> {
        let exact = curvature::curvature_measure(k, phi)?;
        let mc = curvature::curvature_measure_mc(k, phi, samples, seed)?;
        let MeasureMethod::MonteCarlo { std_errors, .. } = mc.method else { unreachable!("Monte Carlo measure") };
        let mut worst: f64 = 0.0;
        for ((e, m), s) in exact.masses.iter().zip(&mc.masses).zip(&std_errors) {
            let z = if *s > 0.0 {
                (e - m).abs() / s
            } else if e == m {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
        let dual = k.cone().dual()?;
        let (area, se) = dual.cap_area_mc(samples, seed.wrapping_add(7))?;
        worst = worst.max((area - dual.cap_area_exact()?).abs() / se);
        Ok(worst)
    };
    match run() {
        Ok(z) => {
            Check::new("monte-carlo", z <= 4.0, format!("max |exact - MC| / σ = {z:.3} at {samples} samples (tol 4σ)"))
        }
        Err(e) => Check::failed("monte-carlo", e),
    }
}

pub fn pointwise(k: &HullPseudoCone, phi: &OrliczFunction, seed: u64) -> Vec<Check> {
    let run = || -> conecurve_core::Result<(f64, f64, functional::LipschitzCheck)> {
        let delta = functional::delta_from_cone(&k.cone().dual()?)?;
        let gauge = OrliczGauge::build(phi.clone(), delta)?;
        let h: Vec<f64> = (0..k.len()).map(|i| 1.0 + 0.1 * i as f64).collect();
        let cells = curvature::gauss_cells(k)?;
        let mut worst: f64 = 0.0;
        let mut analytic = 0.0;
        for cell in cells.iter().filter(|c| !c.is_empty()) {
            let centroid = cell.vertices().iter().sum::<Vector3<f64>>().normalize();
            let v = dvector![centroid.x, centroid.y, centroid.z];
            match functional::log_support_derivative_check(k, &gauge, &h, &v, 1e-5) {
                Ok(d) => {
                    worst = worst.max(d.relative_error());
                    analytic = d.analytic;
                }
                Err(conecurve_core::Error::NearCellBoundary { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        let lipschitz = functional::lipschitz_check(k, &gauge, &h, 0.1, 100, seed)?;
        Ok((worst, analytic, lipschitz))
    };
    match run() {
        Ok((w, a, l)) => vec![
            Check::new(
                "pointwise",
                w <= 1e-6,
                format!("max relative error = {w:.3e} (last analytic {a:.6}) (tol 1e-6)"),
            ),
            Check::new(
                "lipschitz",
                l.holds(),
                format!("worst |Δ log h̄| / |t| = {:.4} <= M = {:.4} over {} draws", l.worst_ratio, l.bound, l.draws),
            ),
        ],
        Err(e) => vec![Check::failed("pointwise", &e), Check::failed("lipschitz", e)],
    }
}

/// Full battery on one body.
pub fn battery(k: &HullPseudoCone, phi: &OrliczFunction, samples: usize, seed: u64) -> Vec<Check> {
    let mut checks = vec![duality(k, seed), partition(k), scaling(k), gradient(k), monte_carlo(k, phi, samples, seed)];
    checks.extend(pointwise(k, phi, seed));
    checks
}
