use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Positive continuous function `ϕ` on `(0, ∞)`.
///
/// The built-in registry is addressed by name: `const` (`ϕ ≡ 1`), `power:p`
/// (`ϕ(t) = t^p`) and `logshift` (`ϕ(t) = log(e + t)`).
#[derive(Clone)]
pub struct OrliczFunction {
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    Constant,
    Power(f64),
    LogShift,
    Custom { name: String, eval: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl OrliczFunction {
    pub fn constant() -> Self {
        Self { kind: Kind::Constant }
    }

    pub fn power(p: f64) -> Self {
        Self { kind: Kind::Power(p) }
    }

    pub fn log_shift() -> Self {
        Self { kind: Kind::LogShift }
    }

    /// A user-supplied function; gauges built from it are integrated numerically.
    pub fn custom(name: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { kind: Kind::Custom { name: name.into(), eval: Arc::new(eval) } }
    }

    /// Parses a registry name.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        match spec {
            "const" => Ok(Self::constant()),
            "logshift" => Ok(Self::log_shift()),
            _ => {
                let p = spec
                    .strip_prefix("power:")
                    .and_then(|p| p.trim().parse::<f64>().ok())
                    .filter(|p| p.is_finite())
                    .ok_or_else(|| Error::UnknownOrlicz(spec.to_string()))?;
                Ok(Self::power(p))
            }
        }
    }

    /// Registry name (round-trips through [`OrliczFunction::parse`]).
    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Constant => "const".into(),
            Kind::Power(p) => format!("power:{p}"),
            Kind::LogShift => "logshift".into(),
            Kind::Custom { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Constant => 1.0,
            Kind::Power(p) => t.powf(*p),
            Kind::LogShift => (std::f64::consts::E + t).ln(),
            Kind::Custom { eval, .. } => eval(t),
        }
    }

    /// Checks positivity on 61 log-spaced points in `[1e-3, 1e3]`.
    pub fn validate(&self) -> Result<()> {
        for t in test_grid() {
            let value = self.eval(t);
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveOrlicz { name: self.name(), t });
            }
        }
        Ok(())
    }

    /// Closed form of `∫_a^b ds / (s ϕ(s))`, when one is known.
    pub(crate) fn closed_integral(&self, a: f64, b: f64) -> Option<f64> {
        match self.kind {
            Kind::Constant => Some(log_ratio(a, b)),
            Kind::Power(0.0) => Some(log_ratio(a, b)),
            // (a^{-p} - b^{-p}) / p, written to avoid cancellation when b ≈ a.
            Kind::Power(p) => Some(-a.powf(-p) * (-p * log_ratio(a, b)).exp_m1() / p),
            _ => None,
        }
    }

    /// Closed form of `∫_δ^∞ ds / (s ϕ(s))` (possibly infinite), when known.
    pub(crate) fn closed_sup(&self, delta: f64) -> Option<f64> {
        match self.kind {
            Kind::Constant => Some(f64::INFINITY),
            Kind::Power(p) if p <= 0.0 => Some(f64::INFINITY),
            Kind::Power(p) => Some(delta.powf(-p) / p),
            Kind::LogShift => Some(f64::INFINITY),
            Kind::Custom { .. } => None,
        }
    }

    /// Closed-form inverse of `t ↦ ∫_δ^t ds / (s ϕ(s))`, when known.
    pub(crate) fn closed_inverse(&self, delta: f64, y: f64) -> Option<f64> {
        match self.kind {
            Kind::Constant => Some(delta * y.exp()),
            Kind::Power(0.0) => Some(delta * y.exp()),
            Kind::Power(p) => Some(delta * (1.0 - p * y * delta.powf(p)).powf(-1.0 / p)),
            _ => None,
        }
    }
}

impl fmt::Debug for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("OrliczFunction").field(&self.name()).finish()
    }
}

impl PartialEq for OrliczFunction {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

fn log_ratio(a: f64, b: f64) -> f64 {
    ((b - a) / a).ln_1p()
}

/// 61 log-spaced points from `1e-3` to `1e3`.
pub fn test_grid() -> impl Iterator<Item = f64> {
    (0..61).map(|k| 10f64.powf(-3.0 + 0.1 * k as f64))
}
