//! Command implementations for the `conecurve` binary.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod export;
pub mod report;
pub mod verify;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use conecurve_core::functional;
use conecurve_core::solver::{self, SolveReport};
use thiserror::Error;

use config::{ConfigError, Problem, RunConfig};
use report::{Copolar, MeasureReport, ReportFile};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Geometry(#[from] conecurve_core::Error),
    #[error(transparent)]
    Export(#[from] export::ExportError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// Every error aborts before a result exists, so all map to the config code.
    pub fn exit_code(&self) -> i32 {
        exit::CONFIG
    }
}

/// What a command produced: text for stdout and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

/// Reads a config and applies the `CONECURVE_SEED` override.
pub fn load_problem(path: &Path, seed_override: Option<u64>) -> Result<Problem, CliError> {
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = seed_override {
        config.solver.seed = seed;
    }
    Ok(config.problem()?)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write { path: path.into(), source })
}

fn run_solver(problem: &Problem, beta: Option<f64>) -> Result<SolveReport, CliError> {
    let opts = problem.config.solve_options();
    Ok(match beta {
        Some(b) => solver::solve_full(&problem.cone, &problem.measure, &problem.orlicz, b, &opts)?,
        None => solver::solve_compact(&problem.cone, &problem.measure, &problem.orlicz, &opts)?,
    })
}

pub fn cmd_solve(problem: &Problem, betas: &[f64], out: Option<&Path>, timing: bool) -> Result<Outcome, CliError> {
    let beta = match betas {
        [] => None,
        [b] => Some(*b),
        _ => return Err(CliError::Usage("solve takes at most one --beta; use demo-nonunique for several".into())),
    };
    let result = run_solver(problem, beta)?;
    let file = report::from_solve(&problem.config, &result, &problem.orlicz, timing)?;
    let text = report::to_json(&file);
    let target = out.map(Path::to_path_buf).or_else(|| problem.config.output.as_ref().and_then(|o| o.report.clone()));
    let stdout = match target {
        Some(path) => {
            write_file(&path, &text)?;
            format!(
                "{}: c = {}, kkt_residual = {:e}, iterations = {}\n",
                file.diagnostics.status, file.constants.c, file.diagnostics.kkt_residual, file.diagnostics.iterations
            )
        }
        None => text,
    };
    let code = if result.converged() { exit::OK } else { exit::NOT_CONVERGED };
    Ok(Outcome { stdout, code })
}

pub fn solve_report(problem: &Problem, beta: Option<f64>, timing: bool) -> Result<(SolveReport, ReportFile), CliError> {
    let result = run_solver(problem, beta)?;
    let file = report::from_solve(&problem.config, &result, &problem.orlicz, timing)?;
    Ok((result, file))
}

pub fn cmd_measure(problem: &Problem, timing: bool) -> Result<Outcome, CliError> {
    let body = problem.body.as_ref().ok_or_else(|| CliError::Usage("measure needs a `body` in the config".into()))?;
    let masses =
        report::masses_of(body, &problem.orlicz, problem.config.solver.mc_samples, problem.config.solver.seed)?;
    let entropy = functional::entropy(body, &functional::QuadratureGrid::build(body, 1e-12)?)?;
    let copolar = body.copolar()?;
    let file = MeasureReport {
        schema_version: report::SCHEMA_VERSION,
        config: problem.config.clone(),
        orlicz: problem.orlicz.name(),
        masses,
        entropy,
        distance_origin: body.distance_origin(),
        copolar: Copolar {
            normals: copolar.normals().iter().map(report::triple).collect(),
            offsets: copolar.offsets().to_vec(),
        },
        environment: report::Environment::new(timing),
    };
    Ok(Outcome { stdout: report::to_json(&file), code: exit::OK })
}

pub fn cmd_export(problem: &Problem, radius: f64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let body = match &problem.body {
        Some(k) => k.clone(),
        None => {
            let result = run_solver(problem, None)?;
            if !result.converged() {
                return Ok(Outcome {
                    stdout: "solver did not converge; nothing exported\n".into(),
                    code: exit::NOT_CONVERGED,
                });
            }
            result.body
        }
    };
    let mesh = export::truncated_mesh(&body, radius)?;
    let obj = mesh.to_obj();
    let target = out.map(Path::to_path_buf).or_else(|| problem.config.output.as_ref().and_then(|o| o.mesh.clone()));
    let stdout = match target {
        Some(path) => {
            write_file(&path, &obj)?;
            format!("wrote {} vertices, {} faces to {}\n", mesh.vertices.len(), mesh.faces.len(), path.display())
        }
        None => obj,
    };
    Ok(Outcome { stdout, code: exit::OK })
}

/// Runs the battery on the named fixtures, or on the body of a config.
pub fn cmd_verify(fixtures: &[String], config: Option<&Path>, seed_override: Option<u64>) -> Result<Outcome, CliError> {
    let mut out = String::new();
    let mut all = true;
    let mut record = |label: &str, checks: Vec<verify::Check>, out: &mut String| {
        for check in checks {
            all &= check.passed;
            writeln!(out, "[{label}] {}", check.line()).unwrap();
        }
    };
    if let Some(path) = config {
        match load_problem(path, seed_override) {
            Ok(problem) => {
                let label = path.display().to_string();
                match &problem.body {
                    Some(body) => {
                        let checks = verify::battery(body, &problem.orlicz, 1_000_000, problem.config.solver.seed);
                        record(&label, checks, &mut out);
                    }
                    None => {
                        let ok = verify::Check {
                            name: "config".into(),
                            passed: true,
                            detail: "inputs valid (no body to check)".into(),
                        };
                        record(&label, vec![ok], &mut out);
                    }
                }
            }
            Err(err) => {
                let check = verify::Check { name: "config".into(), passed: false, detail: err.to_string() };
                record(&path.display().to_string(), vec![check], &mut out);
            }
        }
    }
    let names: Vec<String> = if fixtures.is_empty() && config.is_none() {
        verify::FIXTURES.iter().map(|s| s.to_string()).collect()
    } else {
        fixtures.to_vec()
    };
    for name in &names {
        let body = verify::fixture(name).ok_or_else(|| {
            CliError::Usage(format!("unknown fixture {name}; known: {}", verify::FIXTURES.join(", ")))
        })?;
        let phi = conecurve_core::OrliczFunction::constant();
        let checks = verify::battery(&body, &phi, 1_000_000, seed_override.unwrap_or(0));
        record(name, checks, &mut out);
    }
    writeln!(out, "{}", if all { "all checks passed" } else { "some checks FAILED" }).unwrap();
    Ok(Outcome { stdout: out, code: if all { exit::OK } else { exit::VERIFY_FAILED } })
}

/// One row of the non-uniqueness table.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoRow {
    pub beta: f64,
    pub c: f64,
    pub residual: f64,
    pub max_dg: f64,
    pub converged: bool,
}

/// Compact solve plus one enlarged solve per `β`; writes one report per run
/// into `out_dir` when given.
pub fn cmd_demo_nonunique(
    problem: &Problem,
    betas: &[f64],
    out_dir: Option<&Path>,
    timing: bool,
) -> Result<(Outcome, Vec<DemoRow>), CliError> {
    let betas: Vec<f64> = if betas.is_empty() { problem.config.solver.betas.clone() } else { betas.to_vec() };
    if betas.len() < 2 {
        return Err(CliError::Usage("demo-nonunique needs at least two β values".into()));
    }
    let tol = problem.config.solver.tol;
    let mut rows = Vec::with_capacity(betas.len() + 1);
    let mut baseline: Option<Vec<f64>> = None;
    for beta in std::iter::once(None).chain(betas.iter().copied().map(Some)) {
        let (result, file) = solve_report(problem, beta, timing)?;
        let g = result.radials().to_vec();
        let max_dg = match &baseline {
            Some(base) => base.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
            None => 0.0,
        };
        if baseline.is_none() {
            baseline = Some(g);
        }
        if let Some(dir) = out_dir {
            let name = match beta {
                Some(b) => format!("report_beta_{b}.json"),
                None => "report_compact.json".into(),
            };
            write_file(&dir.join(name), &report::to_json(&file))?;
        }
        rows.push(DemoRow {
            beta: beta.unwrap_or(0.0),
            c: result.c,
            residual: result.kkt_residual,
            max_dg,
            converged: result.converged(),
        });
    }
    let mut out = String::new();
    writeln!(out, "{:>10} {:>22} {:>12} {:>12}", "beta", "c", "residual", "max|dg|").unwrap();
    for r in &rows {
        writeln!(out, "{:>10} {:>22.15} {:>12.3e} {:>12.3e}", r.beta, r.c, r.residual, r.max_dg).unwrap();
    }
    if rows.iter().any(|r| !r.converged) {
        writeln!(out, "some runs did not converge").unwrap();
        return Ok((Outcome { stdout: out, code: exit::NOT_CONVERGED }, rows));
    }
    let residual_ok = rows.iter().all(|r| r.residual <= tol);
    let enlarged = &rows[1..];
    let distinct =
        enlarged.iter().enumerate().all(|(i, a)| enlarged[i + 1..].iter().all(|b| (a.c - b.c).abs() > 10.0 * tol));
    writeln!(out, "residuals <= {tol:e}: {}", if residual_ok { "yes" } else { "NO" }).unwrap();
    writeln!(out, "enlarged c pairwise distinct beyond {:e}: {}", 10.0 * tol, if distinct { "yes" } else { "NO" })
        .unwrap();
    let code = if residual_ok && distinct { exit::OK } else { exit::VERIFY_FAILED };
    Ok((Outcome { stdout: out, code }, rows))
}
