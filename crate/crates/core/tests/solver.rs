#![allow(clippy::needless_range_loop)]

mod common;

use std::f64::consts::PI;

use common::*;
use conecurve_core::curvature::{cell_area, curvature_measure, curvature_measure_mc, gauss_cells, MeasureMethod};
use conecurve_core::functional::{delta_from_cone, entropy_bound, entropy_direct, OrliczGauge};
use conecurve_core::solver::{
    area_jacobian, enlarge_cone, kkt_residual, objective, objective_gradient, project_entropy, solve_compact,
    solve_full, Direction, SolveOptions, SolveReport, SolveStatus,
};
use conecurve_core::{DiscreteMeasure, OrliczFunction, Vector};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::dvector;

fn phis() -> Vec<OrliczFunction> {
    vec![
        OrliczFunction::constant(),
        OrliczFunction::power(1.0),
        OrliczFunction::power(2.0),
        OrliczFunction::log_shift(),
    ]
}

fn solve(mu: &DiscreteMeasure, phi: &OrliczFunction) -> SolveReport {
    solve_compact(&orthant(), mu, phi, &SolveOptions::default()).unwrap()
}

/// `max_i |c m_i - μ_i| <= 1e-7 μ(η) max(1, c)` with masses recomputed from the body.
fn assert_certified(report: &SolveReport, mu: &DiscreteMeasure, phi: &OrliczFunction) {
    assert!(report.converged(), "{:?}", report.status);
    assert!(report.kkt_residual <= 1e-7);
    let masses = curvature_measure(&report.body, phi).unwrap().masses;
    let bound = 1e-7 * mu.total() * report.c.max(1.0);
    for (m, w) in masses.iter().zip(mu.weights()) {
        assert!((report.c * m - w).abs() <= bound, "{} vs {w}", report.c * m);
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn area_jacobian_matches_finite_differences() {
    let k = five_vertex();
    let cells = gauss_cells(&k).unwrap();
    let jac = area_jacobian(&k, &cells);
    let h: f64 = 1e-6;
    for j in 0..k.len() {
        let mut up = k.radials().to_vec();
        let mut down = k.radials().to_vec();
        up[j] *= h.exp();
        down[j] *= (-h).exp();
        let a_up: Vec<f64> = gauss_cells(&k.with_radials(up).unwrap().snap_to_radial().unwrap())
            .unwrap()
            .iter()
            .map(cell_area)
            .collect();
        let a_down: Vec<f64> = gauss_cells(&k.with_radials(down).unwrap().snap_to_radial().unwrap())
            .unwrap()
            .iter()
            .map(cell_area)
            .collect();
        for i in 0..k.len() {
            let fd = (a_up[i] - a_down[i]) / (2.0 * h);
            assert!((fd - jac[(i, j)]).abs() < 1e-7, "({i},{j}): {fd} vs {}", jac[(i, j)]);
        }
    }
}

#[test]
fn objective_gradient_matches_finite_differences() {
    let mu = random_measure(6, 3);
    let delta = delta_from_cone(&orthant().dual().unwrap()).unwrap();
    for phi in phis() {
        let gauge = OrliczGauge::build(phi.clone(), delta).unwrap();
        let g: Vec<f64> = (0..6).map(|i| 0.8 + 0.1 * i as f64).collect();
        let grad = objective_gradient(&g, &mu, &gauge).unwrap();
        for i in 0..6 {
            let h = 1e-6 * g[i];
            let mut up = g.clone();
            let mut down = g.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (objective(&up, &mu, &gauge).unwrap() - objective(&down, &mu, &gauge).unwrap()) / (2.0 * h);
            assert!((fd - grad[i]).abs() <= 1e-6 * grad[i].abs(), "{}: {fd} vs {}", phi.name(), grad[i]);
        }
    }
}

#[test]
fn single_direction_is_solved_exactly() {
    let u = dvector![1.0, 2.0, 3.0].normalize();
    let mu = DiscreteMeasure::new(&orthant(), vec![u], vec![2.5]).unwrap();
    for phi in phis() {
        let r = solve(&mu, &phi);
        assert!(r.converged());
        assert!(r.kkt_residual <= 1e-12);
        assert!((r.entropy - 1.0).abs() < 1e-9);
        let expected = 2.5 / (phi.eval(r.radials()[0]) * PI / 2.0);
        assert!((r.c - expected).abs() < 1e-9 * expected, "{}: {} vs {expected}", phi.name(), r.c);
    }
}

#[test]
fn symmetric_instance_has_a_symmetric_solution() {
    let mu = symmetric_measure();
    for phi in phis() {
        let r = solve(&mu, &phi);
        assert_certified(&r, &mu, &phi);
        let g = r.radials();
        assert!((g[0] - g[1]).abs() < 1e-7 && (g[1] - g[2]).abs() < 1e-7, "{}: {g:?}", phi.name());
        assert!((r.masses[0] - r.masses[3]).abs() < 1e-7 * r.masses[0]);
    }
}

#[test]
fn random_instances_are_certified_for_every_orlicz_function() {
    for seed in [7, 11] {
        let mu = random_measure(20, seed);
        for phi in phis() {
            let r = solve(&mu, &phi);
            assert!(r.iterations <= 5000);
            assert!(r.wall_time.as_secs_f64() <= 60.0);
            assert_certified(&r, &mu, &phi);
            // The solution is entropy-normalized; check with the whole-cap integral.
            let e = entropy_direct(&r.body, 1e-10).unwrap();
            assert!((e - 1.0).abs() < 1e-8, "{}: entropy {e}", phi.name());
            // Lemma-style lower bound on the distance to the origin.
            let lambda = entropy_bound(&orthant().dual().unwrap()).unwrap();
            assert!(r.body.distance_origin() >= lambda - 1e-9);
        }
    }
}

#[test]
fn solution_masses_agree_with_monte_carlo() {
    let mu = random_measure(20, 7);
    let phi = OrliczFunction::power(1.0);
    let r = solve(&mu, &phi);
    let mc = curvature_measure_mc(&r.body, &phi, 1_000_000, 99).unwrap();
    let MeasureMethod::MonteCarlo { std_errors, .. } = &mc.method else { panic!() };
    for i in 0..mu.len() {
        let target = mu.weights()[i] / r.c;
        assert!((mc.masses[i] - target).abs() <= 4.0 * std_errors[i] + 1e-7, "index {i}");
    }
}

#[test]
fn newton_and_gradient_directions_agree() {
    let mu = random_measure(12, 5);
    let phi = OrliczFunction::log_shift();
    let a = solve(&mu, &phi);
    let b =
        solve_compact(&orthant(), &mu, &phi, &SolveOptions { direction: Direction::Newton, ..SolveOptions::default() })
            .unwrap();
    assert_certified(&b, &mu, &phi);
    assert!(b.iterations < a.iterations);
    assert!(sup_distance(a.radials(), b.radials()) < 1e-5);
    assert!((a.c - b.c).abs() < 1e-6 * a.c);
}

#[test]
fn perturbed_solution_violates_the_optimality_condition() {
    let mu = random_measure(10, 3);
    let phi = OrliczFunction::power(1.0);
    let r = solve(&mu, &phi);
    let mut g = r.radials().to_vec();
    g[0] *= 1.01;
    let k = r.body.with_radials(g).unwrap().snap_to_radial().unwrap();
    let projected = project_entropy(&k, r.delta, 1e-12).unwrap().body;
    let masses = curvature_measure(&projected, &phi).unwrap().masses;
    assert!(kkt_residual(&mu, &masses) > 1e-4);
}

#[test]
fn solution_does_not_depend_on_delta() {
    let mu = random_measure(10, 4);
    for phi in [OrliczFunction::power(1.0), OrliczFunction::log_shift()] {
        let a = solve(&mu, &phi);
        let opts = SolveOptions { delta: Some(a.delta / 4.0), ..SolveOptions::default() };
        let b = solve_compact(&orthant(), &mu, &phi, &opts).unwrap();
        assert!(b.converged());
        assert!(sup_distance(a.radials(), b.radials()) < 1e-5, "{}", phi.name());
        assert!((a.c - b.c).abs() < 1e-6 * a.c);
    }
}

#[test]
fn solves_are_deterministic_across_thread_counts() {
    let mu = random_measure(20, 7);
    let phi = OrliczFunction::power(2.0);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| solve(&mu, &phi))
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.radials(), b.radials());
    assert_eq!(a.c.to_bits(), b.c.to_bits());
    assert_eq!(a.objective_trace, b.objective_trace);
}

#[test]
fn iteration_cap_is_reported() {
    let mu = random_measure(20, 7);
    let opts = SolveOptions { max_iters: 1, ..SolveOptions::default() };
    let r = solve_compact(&orthant(), &mu, &OrliczFunction::constant(), &opts).unwrap();
    assert_eq!(r.status, SolveStatus::MaxIterations);
    assert!(!r.converged());
}

#[test]
fn boundary_directions_are_rejected() {
    let on_face = dvector![1.0, 1.0, 0.0].normalize();
    assert!(DiscreteMeasure::new(&orthant(), vec![on_face], vec![1.0]).is_err());
    let u = dvector![1.0, 1.0, 1.0].normalize();
    assert!(DiscreteMeasure::new(&orthant(), vec![u], vec![0.0]).is_err());
}

/// `2π` minus the perimeter of the cap of `Γ(β)`.
fn dual_cap_area_by_perimeter(beta: f64) -> f64 {
    let gamma = enlarge_cone(&orthant(), beta).unwrap();
    let g: Vec<Vector> = gamma.generators().iter().map(|w| w.normalize()).collect();
    let perimeter: f64 = (0..3).map(|i| g[i].dot(&g[(i + 1) % 3]).clamp(-1.0, 1.0).acos()).sum();
    2.0 * PI - perimeter
}

#[test]
fn enlarged_solutions_are_distinct() {
    let mu = symmetric_measure();
    let phi = OrliczFunction::constant();
    let compact = solve(&mu, &phi);
    let mut previous: Option<SolveReport> = None;
    for beta in [0.05, 0.1] {
        let r = solve_full(&orthant(), &mu, &phi, beta, &SolveOptions::default()).unwrap();
        assert_certified(&r, &mu, &phi);
        // With ϕ ≡ 1 the total mass is the area of the dual cap of Γ(β).
        let expected_c = mu.total() / dual_cap_area_by_perimeter(beta);
        assert!((r.c - expected_c).abs() < 1e-9 * expected_c, "β = {beta}: {} vs {expected_c}", r.c);
        assert!((r.c - compact.c).abs() > 10.0 * 1e-8);
        if let Some(p) = &previous {
            assert!((r.c - p.c).abs() > 10.0 * 1e-8);
            assert!(sup_distance(r.radials(), p.radials()) > 1e-3);
        }
        previous = Some(r);
    }
}

#[test]
fn small_enlargement_approaches_the_compact_solution() {
    let mu = symmetric_measure();
    let phi = OrliczFunction::constant();
    let compact = solve(&mu, &phi);
    let gap = |beta: f64| {
        let r = solve_full(&orthant(), &mu, &phi, beta, &SolveOptions::default()).unwrap();
        assert!(r.converged());
        (r.c - compact.c).abs().max(sup_distance(r.radials(), compact.radials()))
    };
    let (coarse, fine) = (gap(1e-3), gap(1e-4));
    assert!(fine < 1e-3, "{fine}");
    // First-order in β.
    let ratio = coarse / fine;
    assert!((5.0..20.0).contains(&ratio), "{ratio}");
}

/// Index of the vertex of `L` at which `K = L ∩ C` attains its support in
/// direction `v`, by a linear program over the generators of `L` and `C`.
fn support_vertex_of_intersection(report: &SolveReport, v: &Vector) -> usize {
    let body = &report.body;
    let points: Vec<Vector> = (0..body.len()).map(|i| body.point(i)).collect();
    let rays = body.cone().generators();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let lambdas: Vec<_> = points.iter().map(|p| lp.add_var(p.dot(v), (0.0, f64::INFINITY))).collect();
    let nus: Vec<_> = rays.iter().map(|w| lp.add_var(w.dot(v), (0.0, f64::INFINITY))).collect();
    let simplex: Vec<_> = lambdas.iter().map(|&l| (l, 1.0)).collect();
    lp.add_constraint(simplex.as_slice(), ComparisonOp::Eq, 1.0);
    // C is the orthant: every coordinate of the point is nonnegative.
    for c in 0..3 {
        let mut row: Vec<_> = lambdas.iter().zip(&points).map(|(&l, p)| (l, p[c])).collect();
        row.extend(nus.iter().zip(rays).map(|(&n, w)| (n, w[c])));
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, 0.0);
    }
    let sol = lp.solve().unwrap();
    let mut x = Vector::zeros(3);
    for (l, p) in lambdas.iter().zip(&points) {
        x += p * sol[*l];
    }
    for (n, w) in nus.iter().zip(rays) {
        x += w * sol[*n];
    }
    let (index, dist) =
        points.iter().enumerate().map(|(i, p)| (i, (p - &x).norm())).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!(dist < 1e-6, "support point is not a vertex of L");
    index
}

#[test]
fn truncation_keeps_the_masses_on_the_smaller_cap() {
    let mu = symmetric_measure();
    let phi = OrliczFunction::power(1.0);
    let beta = 0.1;
    let r = solve_full(&orthant(), &mu, &phi, beta, &SolveOptions::default()).unwrap();
    assert!(r.converged());
    let dual = enlarge_cone(&orthant(), beta).unwrap().dual().unwrap();
    let cap = dual.cap_area_exact().unwrap();
    let n = 20_000;
    let sample = dual.sample_cap(n, 31).unwrap();
    let mut counts = vec![0usize; r.body.len()];
    for v in &sample.points {
        counts[support_vertex_of_intersection(&r, v)] += 1;
    }
    for i in 0..r.body.len() {
        let p = counts[i] as f64 / n as f64;
        let weight = phi.eval(r.radials()[i]) * cap;
        let sigma = weight * (p * (1.0 - p) / n as f64).sqrt();
        assert!((weight * p - r.masses[i]).abs() <= 4.0 * sigma, "index {i}: {} vs {}", weight * p, r.masses[i]);
    }
}
