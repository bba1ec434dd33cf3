//! JSON reports.

use conecurve_core::curvature::{self, MeasureMethod};
use conecurve_core::solver::{SolveReport, SolveStatus};
use conecurve_core::{HullPseudoCone, OrliczFunction, Vector};
use serde::Serialize;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub config: RunConfig,
    pub solution: Solution,
    pub constants: Constants,
    pub masses: Masses,
    pub diagnostics: Diagnostics,
    pub environment: Environment,
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub radials: Vec<f64>,
    pub directions: Vec<[f64; 3]>,
    /// Generators of the cone the body was solved over (`Γ` for enlarged runs).
    pub cone: Vec<[f64; 3]>,
    pub gamma_beta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Constants {
    pub c: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Masses {
    pub exact: Vec<f64>,
    pub mc: Option<Vec<f64>>,
    pub mc_sigma: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub kkt_residual: f64,
    pub entropy: f64,
    pub iterations: usize,
    pub wall_ms: Option<f64>,
    pub status: &'static str,
    pub delta: f64,
    pub distance_origin: f64,
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub precision: &'static str,
    pub threads: Option<usize>,
}

impl Environment {
    pub fn new(timing: bool) -> Self {
        Self { precision: "f64", threads: timing.then(rayon::current_num_threads) }
    }
}

pub fn triple(v: &Vector) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

pub fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIterations => "max_iterations",
        SolveStatus::LineSearchFailed => "line_search_failed",
    }
}

/// Exact masses plus their Monte Carlo counterparts (`samples = 0` skips them).
pub fn masses_of(
    body: &HullPseudoCone,
    phi: &OrliczFunction,
    samples: usize,
    seed: u64,
) -> conecurve_core::Result<Masses> {
    let exact = curvature::curvature_measure(body, phi)?.masses;
    if samples == 0 {
        return Ok(Masses { exact, mc: None, mc_sigma: None });
    }
    let mc = curvature::curvature_measure_mc(body, phi, samples, seed)?;
    let sigma = match mc.method {
        MeasureMethod::MonteCarlo { std_errors, .. } => std_errors,
        MeasureMethod::Exact => vec![0.0; mc.masses.len()],
    };
    Ok(Masses { exact, mc: Some(mc.masses), mc_sigma: Some(sigma) })
}

pub fn from_solve(
    config: &RunConfig,
    report: &SolveReport,
    phi: &OrliczFunction,
    timing: bool,
) -> conecurve_core::Result<ReportFile> {
    let body = &report.body;
    let mut masses = masses_of(body, phi, config.solver.mc_samples, config.solver.seed)?;
    // The solver's exact masses are authoritative.
    masses.exact = report.masses.clone();
    Ok(ReportFile {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        solution: Solution {
            radials: body.radials().to_vec(),
            directions: body.directions().iter().map(triple).collect(),
            cone: body.cone().generators().iter().map(triple).collect(),
            gamma_beta: report.gamma_beta,
        },
        constants: Constants { c: report.c, tau: report.tau },
        masses,
        diagnostics: Diagnostics {
            kkt_residual: report.kkt_residual,
            entropy: report.entropy,
            iterations: report.iterations,
            wall_ms: timing.then_some(report.wall_time.as_secs_f64() * 1e3),
            status: status_name(report.status),
            delta: report.delta,
            distance_origin: body.distance_origin(),
            objective: report.objective_trace.last().copied(),
        },
        environment: Environment::new(timing),
    })
}

/// Output of the `measure` command.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub orlicz: String,
    pub masses: Masses,
    pub entropy: f64,
    pub distance_origin: f64,
    pub copolar: Copolar,
    pub environment: Environment,
}

#[derive(Debug, Clone, Serialize)]
pub struct Copolar {
    pub normals: Vec<[f64; 3]>,
    pub offsets: Vec<f64>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}
