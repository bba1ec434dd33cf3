//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use conecurve_core::solver::{Direction, SolveOptions};
use conecurve_core::{DiscreteMeasure, HullPseudoCone, OrliczFunction, PointedCone, Vector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Allowed deviation of a configured direction from unit length.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid { field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cone: ConeSpec,
    pub measure: MeasureSpec,
    #[serde(default = "default_orlicz")]
    pub orlicz: String,
    #[serde(default)]
    pub solver: SolverSpec,
    /// Explicit hull body for `measure`, `export` and `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

fn default_orlicz() -> String {
    "const".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub generators: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    Inline(InlineMeasure),
    File { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMeasure {
    pub directions: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub directions: Vec<Vec<f64>>,
    pub radials: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub betas: Vec<f64>,
    pub direction: DirectionSpec,
    pub mc_samples: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let opts = SolveOptions::default();
        Self {
            tol: opts.tol,
            max_iters: opts.max_iters,
            seed: opts.seed,
            betas: Vec::new(),
            direction: DirectionSpec::Gradient,
            mc_samples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionSpec {
    Gradient,
    Newton,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
}

/// A configuration with its measure file resolved and all inputs validated.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: RunConfig,
    pub cone: PointedCone,
    pub measure: DiscreteMeasure,
    pub orlicz: OrliczFunction,
    pub body: Option<HullPseudoCone>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut config: Self =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })?;
        if let MeasureSpec::File { file } = &config.measure {
            let resolved = path.parent().unwrap_or(Path::new(".")).join(file);
            let text =
                fs::read_to_string(&resolved).map_err(|source| ConfigError::Io { path: resolved.clone(), source })?;
            let inline: InlineMeasure =
                serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: resolved, source })?;
            config.measure = MeasureSpec::Inline(inline);
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.solver.tol,
            max_iters: self.solver.max_iters,
            seed: self.solver.seed,
            direction: match self.solver.direction {
                DirectionSpec::Gradient => Direction::Gradient,
                DirectionSpec::Newton => Direction::Newton,
            },
            ..SolveOptions::default()
        }
    }

    /// Builds the geometric objects, naming the offending field on failure.
    pub fn problem(&self) -> Result<Problem, ConfigError> {
        let generators = vectors("cone.generators", &self.cone.generators, false)?;
        let cone = PointedCone::from_generators(generators)
            .map_err(|e| ConfigError::invalid("cone.generators", e.to_string()))?;
        let MeasureSpec::Inline(inline) = &self.measure else {
            return Err(ConfigError::invalid("measure.file", "measure file was not resolved"));
        };
        let directions = vectors("measure.directions", &inline.directions, true)?;
        let measure = DiscreteMeasure::new(&cone, directions, inline.weights.clone())
            .map_err(|e| located("measure", "weights", e))?;
        let orlicz = OrliczFunction::parse(&self.orlicz).map_err(|e| ConfigError::invalid("orlicz", e.to_string()))?;
        orlicz.validate().map_err(|e| ConfigError::invalid("orlicz", e.to_string()))?;
        if !(self.solver.tol > 0.0) {
            return Err(ConfigError::invalid("solver.tol", "must be positive"));
        }
        let body = match &self.body {
            Some(spec) => {
                let directions = vectors("body.directions", &spec.directions, true)?;
                let k = HullPseudoCone::new(cone.clone(), directions, spec.radials.clone())
                    .map_err(|e| located("body", "radials", e))?;
                Some(k.snap_to_radial().map_err(|e| ConfigError::invalid("body", e.to_string()))?)
            }
            None => None,
        };
        Ok(Problem { config: self.clone(), cone, measure, orlicz, body })
    }
}

/// Names the offending entry when the core error carries an index.
fn located(section: &str, values: &str, err: conecurve_core::Error) -> ConfigError {
    use conecurve_core::Error;
    let field = match &err {
        Error::NonPositiveValue { index, .. } => format!("{section}.{values}[{index}]"),
        Error::DegenerateVector { index }
        | Error::NonUnitDirection { index, .. }
        | Error::DirectionOutsideCone { index } => format!("{section}.directions[{index}]"),
        _ => section.to_string(),
    };
    ConfigError::invalid(field, err.to_string())
}

fn vectors(field: &str, rows: &[Vec<f64>], unit: bool) -> Result<Vec<Vector>, ConfigError> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != 3 {
                return Err(ConfigError::invalid(
                    format!("{field}[{i}]"),
                    format!("expected 3 coordinates, found {}", row.len()),
                ));
            }
            let v = Vector::from_column_slice(row);
            if unit && (v.norm() - 1.0).abs() > UNIT_TOL {
                return Err(ConfigError::invalid(format!("{field}[{i}]"), format!("norm {} is not 1", v.norm())));
            }
            Ok(v)
        })
        .collect()
}
