#![allow(dead_code)]

use conecurve_core::{DiscreteMeasure, HullPseudoCone, PointedCone, Vector};
use nalgebra::dvector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn orthant() -> PointedCone {
    PointedCone::positive_orthant(3).unwrap()
}

/// Unit vectors with every coordinate at least `margin` after normalization.
pub fn interior_directions(count: usize, margin: f64, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vector> = Vec::with_capacity(count);
    while out.len() < count {
        let v = dvector![rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
        let u = v.normalize();
        if u.iter().all(|x| *x >= margin) && out.iter().all(|w| (w - &u).norm() > 0.05) {
            out.push(u);
        }
    }
    out
}

pub fn random_measure(count: usize, seed: u64) -> DiscreteMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let weights = (0..count).map(|_| rng.gen_range(0.5..2.0)).collect();
    DiscreteMeasure::new(&orthant(), interior_directions(count, 0.1, seed), weights).unwrap()
}

/// Four directions forming an orbit of the coordinate swaps fixing the axis.
pub fn symmetric_measure() -> DiscreteMeasure {
    let a = dvector![1.0, 2.0, 2.0].normalize();
    let b = dvector![2.0, 1.0, 2.0].normalize();
    let c = dvector![2.0, 2.0, 1.0].normalize();
    let d = dvector![1.0, 1.0, 1.0].normalize();
    DiscreteMeasure::new(&orthant(), vec![a, b, c, d], vec![1.0, 1.0, 1.0, 1.0]).unwrap()
}

pub fn k1() -> HullPseudoCone {
    let u = dvector![1.0, 1.0, 1.0].normalize();
    HullPseudoCone::new(orthant(), vec![u], vec![3f64.sqrt()]).unwrap().snap_to_radial().unwrap()
}

/// Five vertices in general position over the octant, snapped.
pub fn five_vertex() -> HullPseudoCone {
    let dirs = vec![
        dvector![1.0, 1.0, 1.0].normalize(),
        dvector![3.0, 1.0, 1.0].normalize(),
        dvector![1.0, 3.0, 1.0].normalize(),
        dvector![1.0, 1.0, 3.0].normalize(),
        dvector![2.0, 2.0, 1.0].normalize(),
    ];
    HullPseudoCone::new(orthant(), dirs, vec![1.2, 1.5, 1.45, 1.55, 1.3]).unwrap().snap_to_radial().unwrap()
}
