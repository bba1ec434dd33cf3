//! Entropy-constrained minimization of `ℱ(g) = Σ μ_i φ(g_i) / μ(η)` and the
//! cone-enlargement pipeline producing further solution pairs `(c, K)`.

mod enlarge;
mod jacobian;
mod measure;

pub use enlarge::{beta_max, enlarge_cone};
pub use jacobian::area_jacobian;
pub use measure::DiscreteMeasure;

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::cone::PointedCone;
use crate::curvature::{self, SphericalCell};
use crate::error::{Error, Result};
use crate::functional::{self, OrliczFunction, OrliczGauge, QuadratureGrid};
use crate::pseudocone::HullPseudoCone;

/// Absolute slack in the Armijo test, relative to `1 + |ℱ|`. Decreases below
/// this level are not resolvable against the entropy quadrature.
pub const ARMIJO_NOISE: f64 = 1e-13;

/// Floor factor: radial values stay above `δ (1 + 1e-6)`.
pub const DELTA_FLOOR: f64 = 1e-6;

/// Largest change of any `log g_i` in one trial step.
const MAX_LOG_STEP: f64 = 1.0;

/// Step halvings tried by the residual-decrease fallback.
const POLISH_HALVINGS: usize = 8;

/// How the descent direction is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Tangential projection of `∇ℱ` in the raw radial coordinates, with
    /// Barzilai–Borwein initial steps.
    Gradient,
    /// Tangential Newton step in `log g`, using the exact derivative of the
    /// cell areas; falls back to the gradient when it is not a descent direction.
    Newton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub armijo: f64,
    pub max_halvings: usize,
    pub quad_tol: f64,
    /// Overrides `δ = exp(-1 / area(Ω_{C°})) / 2`.
    pub delta: Option<f64>,
    pub direction: Direction,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 5000,
            armijo: 1e-4,
            max_halvings: 60,
            quad_tol: 1e-12,
            delta: None,
            direction: Direction::Gradient,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub body: HullPseudoCone,
    pub gamma_beta: Option<f64>,
    pub orlicz: String,
    pub c: f64,
    pub tau: f64,
    pub masses: Vec<f64>,
    pub areas: Vec<f64>,
    pub kkt_residual: f64,
    pub entropy: f64,
    pub delta: f64,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub status: SolveStatus,
    pub wall_time: Duration,
    pub seed: u64,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn radials(&self) -> &[f64] {
        self.body.radials()
    }

    pub fn cone(&self) -> &PointedCone {
        self.body.cone()
    }
}

/// `ℱ(g) = Σ μ_i φ(g_i) / μ(η)`.
pub fn objective(g: &[f64], mu: &DiscreteMeasure, gauge: &OrliczGauge) -> Result<f64> {
    check_len(g, mu)?;
    let mut total = 0.0;
    for (gi, wi) in g.iter().zip(mu.weights()) {
        total += gauge.value(*gi)? * wi;
    }
    Ok(total / mu.total())
}

/// `∂ℱ/∂g_i = μ_i / (μ(η) g_i ϕ(g_i))`.
pub fn objective_gradient(g: &[f64], mu: &DiscreteMeasure, gauge: &OrliczGauge) -> Result<Vec<f64>> {
    check_len(g, mu)?;
    if let Some(index) = g.iter().position(|gi| !(*gi > gauge.delta())) {
        return Err(Error::BelowGaugeThreshold { value: g[index], delta: gauge.delta() });
    }
    Ok(g.iter().zip(mu.weights()).map(|(gi, wi)| wi / mu.total() * gauge.derivative(*gi)).collect())
}

/// `max_i |μ_i / μ(η) - m_i / Σ m_j|`.
pub fn kkt_residual(mu: &DiscreteMeasure, masses: &[f64]) -> f64 {
    let total: f64 = masses.iter().sum();
    mu.weights().iter().zip(masses).map(|(w, m)| (w / mu.total() - m / total).abs()).fold(0.0, f64::max)
}

fn check_len(g: &[f64], mu: &DiscreteMeasure) -> Result<()> {
    if g.len() != mu.len() {
        return Err(Error::DimensionMismatch { expected: mu.len(), found: g.len() });
    }
    Ok(())
}

/// Result of rescaling onto `ℰ = 1`.
#[derive(Debug, Clone)]
pub struct Projection {
    pub body: HullPseudoCone,
    pub scale: f64,
    pub entropy_before: f64,
}

/// Rescales a snapped `K` by `log s = (ℰ(K) - 1) / area(Ω_{C°})`, so `ℰ(sK) = 1`.
pub fn project_entropy(k: &HullPseudoCone, delta: f64, quad_tol: f64) -> Result<Projection> {
    let cells = curvature::gauss_cells(k)?;
    let grid = QuadratureGrid::from_cells(&cells, quad_tol);
    let entropy = functional::entropy(k, &grid)?;
    let cap: f64 = grid.cell_areas().iter().sum();
    rescale(k, entropy, cap, delta)
}

fn rescale(k: &HullPseudoCone, entropy: f64, cap: f64, delta: f64) -> Result<Projection> {
    let scale = ((entropy - 1.0) / cap).exp();
    let body = k.scaled(scale);
    let floor = delta * (1.0 + DELTA_FLOOR);
    if let Some(index) = body.radials().iter().position(|g| !(*g > floor)) {
        return Err(Error::ProjectionBelowDelta { index, value: body.radials()[index], delta });
    }
    Ok(Projection { body, scale, entropy_before: entropy })
}

/// An entropy-normalized iterate with everything the step needs.
struct State {
    body: HullPseudoCone,
    cells: Vec<SphericalCell>,
    areas: Vec<f64>,
    objective: f64,
    residual: f64,
}

struct Context<'a> {
    template: HullPseudoCone,
    mu: &'a DiscreteMeasure,
    gauge: OrliczGauge,
    weights: Vec<f64>,
    opts: &'a SolveOptions,
}

impl Context<'_> {
    fn phi(&self, t: f64) -> f64 {
        self.gauge.base().eval(t)
    }

    /// Snap, cells, entropy projection and objective for raw radials.
    fn evaluate(&self, radials: Vec<f64>) -> Result<State> {
        let k = self.template.with_radials(radials)?;
        let cells = curvature::gauss_cells_unchecked(&k)?;
        // A point with a cell of positive area is exposed, so its radial is exact.
        let mut snapped = k.radials().to_vec();
        for (i, cell) in cells.iter().enumerate() {
            if cell.is_empty() || curvature::cell_area(cell) == 0.0 {
                snapped[i] = snapped[i].min(k.radial(&k.directions()[i])?);
            }
        }
        let k = k.with_snapped_radials(snapped);
        let grid = QuadratureGrid::from_cells(&cells, self.opts.quad_tol);
        let entropy = functional::entropy(&k, &grid)?;
        let areas = grid.cell_areas().to_vec();
        let cap: f64 = areas.iter().sum();
        let body = rescale(&k, entropy, cap, self.gauge.delta())?.body;
        let objective = objective(body.radials(), self.mu, &self.gauge)?;
        let masses: Vec<f64> = areas.iter().zip(body.radials()).map(|(a, g)| self.phi(*g) * a).collect();
        let residual = kkt_residual(self.mu, &masses);
        Ok(State { body, cells, areas, objective, residual })
    }

    /// Tangential projection of `∇ℱ` in raw coordinates.
    fn gradient_direction(&self, state: &State) -> Result<Vec<f64>> {
        let g = state.body.radials();
        let grad = objective_gradient(g, self.mu, &self.gauge)?;
        let normal = functional::gradient_from_areas(g, &state.areas);
        let coeff = dot(&grad, &normal) / dot(&normal, &normal);
        Ok(grad.iter().zip(&normal).map(|(f, e)| -(f - coeff * e)).collect())
    }

    /// Tangential Newton step in `x = log g`; `None` if no descent direction results.
    fn newton_direction(&self, state: &State) -> Option<Vec<f64>> {
        let g = state.body.radials();
        let m = g.len();
        let b: Vec<f64> = (0..m).map(|i| self.weights[i] / self.phi(g[i])).collect();
        let a = &state.areas;
        let lambda = dot(&b, a) / dot(a, a);
        let jac = area_jacobian(&state.body, &state.cells);
        let active: Vec<usize> = (0..m).filter(|&i| a[i] > 0.0).collect();
        let k = active.len();
        let mut w = DMatrix::zeros(k, k);
        for (r, &i) in active.iter().enumerate() {
            for (c, &j) in active.iter().enumerate() {
                w[(r, c)] = -lambda * jac[(i, j)];
            }
            w[(r, r)] += self.second_derivative(i, g[i]);
        }
        let scale = (0..k).map(|r| w[(r, r)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut d = vec![0.0; m];
        for &i in &(0..m).filter(|i| a[*i] <= 0.0).collect::<Vec<_>>() {
            d[i] = -b[i] / scale;
        }
        let mut theta = 0.0;
        for _ in 0..12 {
            let mut kkt = DMatrix::zeros(k + 1, k + 1);
            let mut rhs = DVector::zeros(k + 1);
            for r in 0..k {
                for c in 0..k {
                    kkt[(r, c)] = w[(r, c)];
                }
                kkt[(r, r)] += theta * scale;
                kkt[(r, k)] = a[active[r]];
                kkt[(k, r)] = a[active[r]];
                rhs[r] = -b[active[r]];
            }
            if let Some(sol) = kkt.lu().solve(&rhs) {
                let step = sol.rows(0, k);
                let curvature = (step.transpose() * &w * step)[(0, 0)];
                let slope: f64 = active.iter().enumerate().map(|(r, &i)| b[i] * step[r]).sum();
                if sol.iter().all(|v| v.is_finite()) && curvature > 0.0 && slope < 0.0 {
                    for (r, &i) in active.iter().enumerate() {
                        d[i] = step[r];
                    }
                    return Some(d);
                }
            }
            theta = if theta == 0.0 { 1e-8 } else { theta * 10.0 };
        }
        None
    }

    /// `∂²ℱ/∂x_i²` with `x = log g`: `-w_i g ϕ'(g) / ϕ(g)²`, `ϕ'` by central differences.
    fn second_derivative(&self, i: usize, g: f64) -> f64 {
        let h = 1e-5;
        let dphi = (self.phi(g * (1.0 + h)) - self.phi(g * (1.0 - h))) / (2.0 * h);
        -self.weights[i] * dphi / self.phi(g).powi(2)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `ℱ` over entropy-normalized hull pseudo-cones with directions
/// `supp μ` and returns the certified pair `(c, K)` with `c J_ϕ(K, ·) ≈ μ`.
pub fn solve_compact(
    c: &PointedCone,
    mu: &DiscreteMeasure,
    phi: &OrliczFunction,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let start = Instant::now();
    if c.dim() != 3 {
        return Err(Error::UnsupportedDimension(c.dim()));
    }
    let dual = c.dual()?;
    let delta = match opts.delta {
        Some(d) => d,
        None => functional::delta_from_cone(&dual)?,
    };
    let gauge = OrliczGauge::build(phi.clone(), delta)?;
    let template = HullPseudoCone::new(c.clone(), mu.directions().to_vec(), vec![1.0; mu.len()])?;
    let ctx = Context { template, mu, gauge, weights: mu.normalized(), opts };

    let mut state = ctx.evaluate(vec![1.0; mu.len()])?;
    let mut trace = vec![state.objective];
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    while iterations < opts.max_iters {
        if state.residual <= opts.tol {
            status = SolveStatus::Converged;
            break;
        }
        iterations += 1;
        let next = match opts.direction {
            Direction::Newton => match ctx.newton_direction(&state) {
                Some(d) => line_search_log(&ctx, &state, &d)?,
                None => None,
            },
            Direction::Gradient => None,
        };
        let next = match next {
            Some(s) => Some(s),
            None => {
                let d = ctx.gradient_direction(&state)?;
                let t0 = bb_step(&previous, &state, &d);
                let accepted = line_search_raw(&ctx, &state, &d, t0)?;
                previous = Some((state.body.radials().to_vec(), d));
                match accepted {
                    Some(s) => Some(s),
                    None => polish(&ctx, &state)?,
                }
            }
        };
        match next {
            Some(s) => {
                debug_assert!(s.objective <= state.objective + ARMIJO_NOISE * (1.0 + state.objective.abs()));
                state = s;
                trace.push(state.objective);
            }
            None => {
                status =
                    if state.residual <= opts.tol { SolveStatus::Converged } else { SolveStatus::LineSearchFailed };
                break;
            }
        }
    }
    if status == SolveStatus::MaxIterations && state.residual <= opts.tol {
        status = SolveStatus::Converged;
    }
    finish(state.body, ctx.gauge, mu, opts, trace, iterations, status, start)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    body: HullPseudoCone,
    gauge: OrliczGauge,
    mu: &DiscreteMeasure,
    opts: &SolveOptions,
    trace: Vec<f64>,
    iterations: usize,
    status: SolveStatus,
    start: Instant,
) -> Result<SolveReport> {
    let cells = curvature::gauss_cells(&body)?;
    let areas: Vec<f64> = cells.iter().map(curvature::cell_area).collect();
    let grid = QuadratureGrid::from_cells(&cells, opts.quad_tol);
    let entropy = functional::entropy(&body, &grid)?;
    let measure = curvature::measure_from_areas(&body, gauge.base(), &areas);
    let total = measure.total;
    let kkt_residual = kkt_residual(mu, &measure.masses);
    Ok(SolveReport {
        gamma_beta: None,
        orlicz: gauge.base().name(),
        c: mu.total() / total,
        tau: 1.0 / total,
        masses: measure.masses,
        areas,
        kkt_residual,
        entropy,
        delta: gauge.delta(),
        objective_trace: trace,
        iterations,
        status,
        wall_time: start.elapsed(),
        seed: opts.seed,
        body,
    })
}

fn armijo_ok(ctx: &Context, state: &State, trial: &State, t: f64, slope: f64) -> bool {
    let slack = ARMIJO_NOISE * (1.0 + state.objective.abs());
    trial.objective <= state.objective + ctx.opts.armijo * t * slope + slack
}

fn line_search_log(ctx: &Context, state: &State, d: &[f64]) -> Result<Option<State>> {
    let g = state.body.radials();
    let b: Vec<f64> = (0..g.len()).map(|i| ctx.weights[i] / ctx.phi(g[i])).collect();
    let slope = dot(&b, d);
    let largest = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut t = if largest > MAX_LOG_STEP { MAX_LOG_STEP / largest } else { 1.0 };
    for _ in 0..=ctx.opts.max_halvings {
        let radials: Vec<f64> = g.iter().zip(d).map(|(gi, di)| gi * (t * di).exp()).collect();
        if let Some(trial) = try_evaluate(ctx, radials)? {
            if armijo_ok(ctx, state, &trial, t, slope) {
                return Ok(Some(trial));
            }
        }
        t *= 0.5;
    }
    Ok(None)
}

fn line_search_raw(ctx: &Context, state: &State, d: &[f64], t0: f64) -> Result<Option<State>> {
    let g = state.body.radials();
    let grad = objective_gradient(g, ctx.mu, &ctx.gauge)?;
    let slope = dot(&grad, d);
    if !(slope < 0.0) {
        return Ok(None);
    }
    let mut t = t0;
    for _ in 0..=ctx.opts.max_halvings {
        let radials: Vec<f64> = g.iter().zip(d).map(|(gi, di)| gi + t * di).collect();
        if radials.iter().all(|r| *r > 0.0) {
            if let Some(trial) = try_evaluate(ctx, radials)? {
                if armijo_ok(ctx, state, &trial, t, slope) {
                    return Ok(Some(trial));
                }
            }
        }
        t *= 0.5;
    }
    Ok(None)
}

/// Near the optimum `ℱ` stops resolving progress in double precision and
/// Armijo fails; a Newton step is then accepted if it lowers the residual.
fn polish(ctx: &Context, state: &State) -> Result<Option<State>> {
    let Some(d) = ctx.newton_direction(state) else { return Ok(None) };
    let g = state.body.radials();
    let slack = ARMIJO_NOISE * (1.0 + state.objective.abs());
    let largest = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut t = if largest > MAX_LOG_STEP { MAX_LOG_STEP / largest } else { 1.0 };
    for _ in 0..POLISH_HALVINGS {
        let radials: Vec<f64> = g.iter().zip(&d).map(|(gi, di)| gi * (t * di).exp()).collect();
        if let Some(trial) = try_evaluate(ctx, radials)? {
            if trial.residual < state.residual && trial.objective <= state.objective + slack {
                return Ok(Some(trial));
            }
        }
        t *= 0.5;
    }
    Ok(None)
}

/// Trial points may leave the admissible region; those count as rejected.
fn try_evaluate(ctx: &Context, radials: Vec<f64>) -> Result<Option<State>> {
    match ctx.evaluate(radials) {
        Ok(s) => Ok(Some(s)),
        Err(
            Error::ProjectionBelowDelta { .. } | Error::BelowGaugeThreshold { .. } | Error::NonPositiveValue { .. },
        ) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Barzilai–Borwein step `<s, s> / <s, y>` from the previous accepted step,
/// where `y` is the change of the negated direction; `1` when unavailable.
fn bb_step(previous: &Option<(Vec<f64>, Vec<f64>)>, state: &State, d: &[f64]) -> f64 {
    let Some((g_prev, d_prev)) = previous else { return 1.0 };
    let g = state.body.radials();
    let s: Vec<f64> = g.iter().zip(g_prev).map(|(a, b)| a - b).collect();
    let y: Vec<f64> = d_prev.iter().zip(d).map(|(a, b)| a - b).collect();
    let sy = dot(&s, &y);
    if sy > 0.0 {
        dot(&s, &s) / sy
    } else {
        1.0
    }
}

/// [`solve_compact`] over the enlarged cone `Γ(β)`. The returned body `L`
/// lives over `Γ`; its masses on `Ω_C` are those of `K = L ∩ C`.
pub fn solve_full(
    c: &PointedCone,
    mu: &DiscreteMeasure,
    phi: &OrliczFunction,
    beta: f64,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let gamma = enlarge_cone(c, beta)?;
    // Directions strictly inside C are strictly inside Γ.
    let lifted = DiscreteMeasure::new(&gamma, mu.directions().to_vec(), mu.weights().to_vec())?;
    let mut report = solve_compact(&gamma, &lifted, phi, opts)?;
    report.gamma_beta = Some(beta);
    Ok(report)
}
