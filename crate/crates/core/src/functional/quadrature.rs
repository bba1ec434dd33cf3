use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spherical::triangle_area;

/// Maximum subdivision depth of a spherical triangle.
pub const MAX_DEPTH: u32 = 16;

/// Gauss–Legendre order of the collapsed triangle rule.
const TRIANGLE_ORDER: usize = 8;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const GAUSS7_WEIGHTS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS7_WEIGHTS[3] * fc;
    for k in 0..7 {
        let dx = h * GK_NODES[k];
        let pair = f(c - dx) + f(c + dx);
        kronrod += GK_WEIGHTS[k] * pair;
        if k % 2 == 1 {
            gauss += GAUSS7_WEIGHTS[k / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]` to relative `tol`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (value, err) = gk15(&f, a, b);
    refine(&f, a, b, value, err, tol * value.abs().max(f64::MIN_POSITIVE), 0)
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, value: f64, err: f64, abs_tol: f64, depth: u32) -> f64 {
    if err <= abs_tol || depth >= 50 {
        return value;
    }
    let m = 0.5 * (a + b);
    let (left, el) = gk15(f, a, m);
    let (right, er) = gk15(f, m, b);
    if ((left + right) - value).abs() <= abs_tol && el + er <= abs_tol {
        return left + right;
    }
    refine(f, a, m, left, el, 0.5 * abs_tol, depth + 1) + refine(f, m, b, right, er, 0.5 * abs_tol, depth + 1)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(order);
    for k in 0..order {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=order {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        rule.push((0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// Collapsed Gauss rule on the reference triangle `{s, t >= 0, s + t <= 1}`.
fn triangle_rule() -> &'static [(f64, f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let line = gauss_legendre(TRIANGLE_ORDER);
        let mut rule = Vec::with_capacity(line.len() * line.len());
        for &(x, wx) in &line {
            for &(y, wy) in &line {
                rule.push((x, (1.0 - x) * y, wx * wy * (1.0 - x)));
            }
        }
        rule
    })
}

/// Spherical triangle given by the central projection of a flat triangle
/// whose plane avoids the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalTriangle {
    pub vertices: [Vector3<f64>; 3],
}

impl SphericalTriangle {
    pub fn new(a: Vector3<f64>, b: Vector3<f64>, c: Vector3<f64>) -> Self {
        Self { vertices: [a, b, c] }
    }

    pub fn area(&self) -> f64 {
        let [a, b, c] = self.vertices.map(|v| v.normalize());
        triangle_area(&a, &b, &c)
    }

    /// `∫ f` over the projected triangle; `dA = |det(a, b, c)| / |p|³ ds dt`.
    pub fn integrate<F: Fn(&Vector3<f64>) -> f64>(&self, f: &F) -> f64 {
        let [a, b, c] = self.vertices;
        let det = a.dot(&b.cross(&c)).abs();
        let (ab, ac) = (b - a, c - a);
        let mut sum = 0.0;
        for &(s, t, w) in triangle_rule() {
            let p = a + ab * s + ac * t;
            let r = p.norm();
            sum += w * f(&(p / r)) / (r * r * r);
        }
        sum * det
    }

    /// Midpoint subdivision of the flat triangle into four.
    pub fn split(&self) -> [Self; 4] {
        let [a, b, c] = self.vertices;
        let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
        [Self::new(a, ab, ca), Self::new(ab, b, bc), Self::new(ca, bc, c), Self::new(ab, bc, ca)]
    }
}

struct Leaf {
    triangle: SphericalTriangle,
    value: f64,
    error: f64,
    depth: u32,
}

struct Pending(f64, usize);

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

fn evaluate<F>(triangle: SphericalTriangle, f: &F) -> (f64, f64)
where
    F: Fn(&Vector3<f64>) -> f64,
{
    let coarse = triangle.integrate(f);
    let fine: f64 = triangle.split().iter().map(|t| t.integrate(f)).sum();
    (fine, (fine - coarse).abs())
}

/// Globally adaptive integration over a list of spherical triangles.
///
/// The triangle with the largest error estimate is split until the summed
/// estimate drops below `abs_tol`. Initial triangles are evaluated in
/// parallel; refinement and summation run in a fixed order, so the result
/// does not depend on the thread count.
pub fn integrate_triangles<F>(triangles: &[SphericalTriangle], f: F, abs_tol: f64) -> Result<f64>
where
    F: Fn(&Vector3<f64>) -> f64 + Sync,
{
    let initial: Vec<(f64, f64)> = triangles.par_iter().map(|t| evaluate(*t, &f)).collect();
    let mut leaves: Vec<Option<Leaf>> = Vec::with_capacity(triangles.len());
    let mut heap = BinaryHeap::new();
    let mut total_error = 0.0;
    for (id, (triangle, (value, error))) in triangles.iter().zip(initial).enumerate() {
        total_error += error;
        heap.push(Pending(error, id));
        leaves.push(Some(Leaf { triangle: *triangle, value, error, depth: 0 }));
    }
    while total_error > abs_tol {
        let Some(Pending(_, id)) = heap.pop() else { break };
        let leaf = leaves[id].take().expect("pending leaf exists");
        if leaf.depth >= MAX_DEPTH {
            let estimate: f64 = leaves.iter().flatten().map(|l| l.value).sum::<f64>() + leaf.value;
            return Err(Error::QuadratureNotConverged { estimate, tolerance: abs_tol });
        }
        total_error -= leaf.error;
        for child in leaf.triangle.split() {
            let (value, error) = evaluate(child, &f);
            let id = leaves.len();
            total_error += error;
            heap.push(Pending(error, id));
            leaves.push(Some(Leaf { triangle: child, value, error, depth: leaf.depth + 1 }));
        }
        // Guards against drift in the running sum.
        if total_error <= abs_tol {
            total_error = leaves.iter().flatten().map(|l| l.error).sum();
        }
    }
    Ok(leaves.iter().flatten().map(|l| l.value).sum())
}
