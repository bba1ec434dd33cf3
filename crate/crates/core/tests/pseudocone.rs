mod common;

use common::{five_vertex, interior_directions, k1, orthant};
use conecurve_core::{HullPseudoCone, Vector};
use itertools::Itertools;
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{dvector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v3(v: &Vector) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

fn random_fixture(seed: u64) -> HullPseudoCone {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(3..=12);
    let dirs = interior_directions(count, 0.08, seed.wrapping_mul(31) + 7);
    let radials = (0..count).map(|_| rng.gen_range(1.0..2.0)).collect();
    HullPseudoCone::new(orthant(), dirs, radials).unwrap().snap_to_radial().unwrap()
}

/// Vertices of `K* = {x : <x, w_j> <= 0, <x, p_i> <= -1}` by brute force.
fn copolar_vertices(k: &HullPseudoCone) -> Vec<Vector3<f64>> {
    let mut planes: Vec<(Vector3<f64>, f64)> = (0..k.len()).map(|i| (v3(&k.point(i)), -1.0)).collect();
    let atoms = planes.len();
    planes.extend(k.cone().generators().iter().map(|w| (v3(w), 0.0)));
    let mut out = Vec::new();
    for t in (0..planes.len()).combinations(3) {
        if t.iter().all(|&i| i >= atoms) {
            continue;
        }
        let m =
            Matrix3::from_rows(&[planes[t[0]].0.transpose(), planes[t[1]].0.transpose(), planes[t[2]].0.transpose()]);
        let Some(inv) = m.try_inverse() else { continue };
        let x = inv * Vector3::new(planes[t[0]].1, planes[t[1]].1, planes[t[2]].1);
        if planes.iter().all(|(n, b)| n.dot(&x) <= b + 1e-10 * (1.0 + x.norm())) {
            out.push(x);
        }
    }
    out
}

fn support_bar_of_vertices(vertices: &[Vector3<f64>], u: &Vector3<f64>) -> f64 {
    -vertices.iter().map(|q| q.dot(u)).fold(f64::NEG_INFINITY, f64::max)
}

/// `b(K) = max_{v ∈ C°, |v| <= 1} min_i <p_i, -v>`, with the ball replaced by
/// tangent-plane cuts. Returns a bracket `[lower, upper]` around `b(K)`.
fn distance_by_cutting_planes(k: &HullPseudoCone) -> (f64, f64) {
    let mut cuts: Vec<Vector3<f64>> = vec![
        Vector3::new(-1.0, -1.0, -1.0).normalize(),
        Vector3::new(-1.0, 0.0, 0.0),
        Vector3::new(0.0, -1.0, 0.0),
        Vector3::new(0.0, 0.0, -1.0),
    ];
    for _ in 0..500 {
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
        let v: Vec<_> = (0..3).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
        for i in 0..k.len() {
            let p = k.point(i);
            lp.add_constraint([(t, 1.0), (v[0], p[0]), (v[1], p[1]), (v[2], p[2])], ComparisonOp::Le, 0.0);
        }
        for w in k.cone().generators() {
            lp.add_constraint([(v[0], w[0]), (v[1], w[1]), (v[2], w[2])], ComparisonOp::Le, 0.0);
        }
        for c in &cuts {
            lp.add_constraint([(v[0], c[0]), (v[1], c[1]), (v[2], c[2])], ComparisonOp::Le, 1.0);
        }
        let sol = lp.solve().unwrap();
        let x = Vector3::new(sol[v[0]], sol[v[1]], sol[v[2]]);
        let upper = sol[t];
        // Scaling the maximizer back onto the ball keeps it feasible.
        let lower = upper / x.norm().max(1.0);
        // Cuts violated by less than the LP feasibility tolerance stall.
        if upper - lower < 1e-7 {
            return (lower, upper);
        }
        cuts.push(x.normalize());
    }
    panic!("cutting planes did not converge");
}

#[test]
fn radial_times_copolar_support_is_one() {
    for seed in 0..10 {
        let k = random_fixture(seed);
        let vertices = copolar_vertices(&k);
        for u in interior_directions(100, 0.02, 1000 + seed) {
            let rho = k.radial(&u).unwrap();
            let product = rho * support_bar_of_vertices(&vertices, &v3(&u));
            assert!((product - 1.0).abs() < 1e-9, "seed {seed}: {product}");
        }
    }
}

#[test]
fn double_copolar_has_the_same_radial_function() {
    for seed in 0..10 {
        let k = random_fixture(seed);
        let vertices = copolar_vertices(&k);
        let kk = k.copolar().unwrap().copolar().unwrap();
        for u in interior_directions(100, 0.02, 2000 + seed) {
            // ρ_{(K*)*}(u) = max_q 1/|<u, q>| over the vertices of K*.
            let via_vertices = vertices.iter().map(|q| 1.0 / q.dot(&v3(&u)).abs()).fold(0.0, f64::max);
            let direct = k.radial(&u).unwrap();
            assert!((via_vertices - direct).abs() < 1e-9 * direct, "seed {seed}");
            assert!((kk.radial(&u).unwrap() - direct).abs() < 1e-9 * direct);
        }
    }
}

#[test]
fn copolar_support_agrees_with_vertex_enumeration() {
    for seed in 0..10 {
        let k = random_fixture(seed);
        let wulff = k.copolar().unwrap();
        let vertices = copolar_vertices(&k);
        for u in interior_directions(50, 0.02, 3000 + seed) {
            let a = wulff.support_bar(&u).unwrap();
            let b = support_bar_of_vertices(&vertices, &v3(&u));
            assert!((a - b).abs() < 1e-9 * b.max(1.0), "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn support_bar_is_the_least_atom_value() {
    let k = five_vertex();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let v = -dvector![rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0)].normalize();
        let brute = (0..k.len()).map(|i| -k.point(i).dot(&v)).fold(f64::INFINITY, f64::min);
        assert!((k.support_bar(&v).unwrap() - brute).abs() < 1e-14);
    }
}

#[test]
fn k1_quantities() {
    let k = k1();
    assert!((k.radials()[0] - 3f64.sqrt()).abs() < 1e-12);
    assert!((k.distance_origin() - 3f64.sqrt()).abs() < 1e-12);
    // The apex of K1 is (1, 1, 1); coordinate axes meet K1 at distance 3.
    let e1 = dvector![1.0, 0.0, 0.0];
    assert!(k.radial(&e1).is_err() || (k.radial(&e1).unwrap() - 3.0).abs() < 1e-9);
}

#[test]
fn distance_matches_cutting_plane_oracle() {
    let mut fixtures = vec![k1(), five_vertex()];
    fixtures.extend((0..10).map(random_fixture));
    for (n, k) in fixtures.iter().enumerate() {
        let exact = k.distance_origin();
        let (lower, upper) = distance_by_cutting_planes(k);
        assert!(lower - 1e-9 <= exact && exact <= upper + 1e-9, "fixture {n}: {exact} not in [{lower}, {upper}]");
    }
}

#[test]
fn snapping_only_lowers_hidden_radials() {
    let dirs = vec![dvector![1.0, 1.0, 1.0].normalize(), dvector![2.0, 1.0, 1.0].normalize()];
    // The second point is deep behind the first facet structure.
    let k = HullPseudoCone::new(orthant(), dirs.clone(), vec![1.0, 10.0]).unwrap();
    let s = k.snap_to_radial().unwrap();
    assert_eq!(s.radials()[0], 1.0);
    assert!(s.radials()[1] < 10.0);
    assert!((s.radial(&dirs[1]).unwrap() - s.radials()[1]).abs() < 1e-9);
    let again = s.snap_to_radial().unwrap();
    for (a, b) in again.radials().iter().zip(s.radials()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn scaling_scales_everything() {
    let k = five_vertex();
    let s = k.scaled(2.5);
    assert!((s.distance_origin() - 2.5 * k.distance_origin()).abs() < 1e-12);
    let u = dvector![1.0, 2.0, 3.0].normalize();
    assert!((s.radial(&u).unwrap() - 2.5 * k.radial(&u).unwrap()).abs() < 1e-9);
}
