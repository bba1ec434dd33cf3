use super::orlicz::OrliczFunction;
use crate::error::{Error, Result};

/// Relative accuracy of numerically integrated gauges.
const GAUGE_REL_TOL: f64 = 1e-13;

/// Upper end used when the supremum of a numeric gauge must be estimated.
const NUMERIC_T_MAX: f64 = 1e300;

/// Margin kept below a finite supremum when clamping.
pub const SATURATION_MARGIN: f64 = 1e-12;

/// The strictly increasing gauge `φ(t) = ∫_δ^t ds / (s ϕ(s))` on `(δ, ∞)`.
///
/// `φ(δ+) = 0`, `φ' = 1/(t ϕ(t))`, and `sup φ` may be finite (e.g. `ϕ(t) = t^p`, `p > 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczGauge {
    base: OrliczFunction,
    delta: f64,
    sup: f64,
}

impl OrliczGauge {
    pub fn build(base: OrliczFunction, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidDelta(delta));
        }
        base.validate()?;
        let value = base.eval(delta);
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositiveOrlicz { name: base.name(), t: delta });
        }
        let sup = match base.closed_sup(delta) {
            Some(s) => s,
            None => integral(&base, delta, NUMERIC_T_MAX),
        };
        Ok(Self { base, delta, sup })
    }

    pub fn base(&self) -> &OrliczFunction {
        &self.base
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `lim_{t→∞} φ(t)`.
    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(match self.base.closed_integral(self.delta, t) {
            Some(v) => v,
            None => integral(&self.base, self.delta, t),
        })
    }

    /// `φ(b) - φ(a)` without forming the two values separately.
    pub fn difference(&self, a: f64, b: f64) -> Result<f64> {
        self.check_domain(a)?;
        self.check_domain(b)?;
        Ok(match self.base.closed_integral(a, b) {
            Some(v) => v,
            None => integral(&self.base, a, b),
        })
    }

    /// `φ'(t) = 1 / (t ϕ(t))`.
    pub fn derivative(&self, t: f64) -> f64 {
        1.0 / (t * self.base.eval(t))
    }

    /// `φ⁻¹(y)` for `0 <= y < sup φ`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::InvalidArgument(format!("gauge value {y} is negative")));
        }
        if y >= self.sup {
            return Err(Error::GaugeSaturated { sup: self.sup, target: y });
        }
        if y == 0.0 {
            return Ok(self.delta);
        }
        if let Some(t) = self.base.closed_inverse(self.delta, y) {
            if t.is_finite() {
                return Ok(t);
            }
        }
        self.bracketed_inverse(y)
    }

    /// Inverse with requests at or beyond a finite supremum clamped to
    /// `sup - SATURATION_MARGIN`; the flag reports whether clamping happened.
    pub fn inverse_clamped(&self, y: f64) -> Result<(f64, bool)> {
        if self.sup.is_finite() && y >= self.sup - SATURATION_MARGIN {
            return Ok((self.inverse(self.sup - SATURATION_MARGIN)?, true));
        }
        Ok((self.inverse(y)?, false))
    }

    fn bracketed_inverse(&self, y: f64) -> Result<f64> {
        let mut lo = self.delta * (1.0 + 1e-12);
        let mut hi = 2.0 * self.delta;
        while self.value(hi)? < y {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::GaugeSaturated { sup: self.sup, target: y });
            }
        }
        // Safeguarded Newton in log t.
        let mut t = (lo * hi).sqrt();
        for _ in 0..200 {
            let f = self.value(t)? - y;
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            // d φ / d log t = 1 / ϕ(t)
            let step = f * self.base.eval(t);
            let mut next = t * (-step).exp();
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * t || hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(next);
            }
            t = next;
        }
        Ok(t)
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if t > self.delta && t.is_finite() {
            Ok(())
        } else {
            Err(Error::BelowGaugeThreshold { value: t, delta: self.delta })
        }
    }
}

/// `∫_a^b ds / (s ϕ(s)) = ∫_{ln a}^{ln b} dx / ϕ(e^x)`.
fn integral(base: &OrliczFunction, a: f64, b: f64) -> f64 {
    let (xa, xb) = (a.ln(), b.ln());
    super::quadrature::gauss_kronrod(|x| 1.0 / base.eval(x.exp()), xa, xb, GAUGE_REL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::orlicz::test_grid;

    #[test]
    fn closed_form_gauges() {
        let g = OrliczGauge::build(OrliczFunction::constant(), 0.5).unwrap();
        assert!((g.value(1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        let g = OrliczGauge::build(OrliczFunction::power(1.0), 0.5).unwrap();
        assert!((g.value(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((g.sup() - 2.0).abs() < 1e-15);
        assert!(g.value(0.5).is_err());
        assert!(g.value(0.1).is_err());
    }

    fn octant_delta() -> f64 {
        0.5 * (-2.0 / std::f64::consts::PI).exp()
    }

    fn all_phis() -> [OrliczFunction; 4] {
        [
            OrliczFunction::constant(),
            OrliczFunction::power(1.0),
            OrliczFunction::power(2.0),
            OrliczFunction::log_shift(),
        ]
    }

    /// Central differences in `log t`, Richardson-extrapolated twice, estimate
    /// `dφ/d log t = 1 / ϕ(t)`; differences come from `difference` to avoid cancellation.
    fn log_derivative(g: &OrliczGauge, t: f64, h: f64) -> f64 {
        let central = |h: f64| g.difference(t * (-h).exp(), t * h.exp()).unwrap() / (2.0 * h);
        let (d1, d2, d3) = (central(h), central(h / 2.0), central(h / 4.0));
        let (r1, r2) = ((4.0 * d2 - d1) / 3.0, (4.0 * d3 - d2) / 3.0);
        (16.0 * r2 - r1) / 15.0
    }

    /// Numerical differentiation of the built gauge reproduces `ϕ` through
    /// `ϕ(t) = 1 / (t φ'(t))`.
    #[test]
    fn numerical_derivative_recovers_phi() {
        let delta = octant_delta();
        for phi in all_phis() {
            let g = OrliczGauge::build(phi.clone(), delta).unwrap();
            for t in test_grid().filter(|&t| t > delta * 1.1) {
                let recovered = 1.0 / log_derivative(&g, t, 0.04);
                assert!((recovered / phi.eval(t) - 1.0).abs() < 1e-12, "{} at {t}", phi.name());
                assert!((phi.eval(t) * t * g.derivative(t) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let delta = octant_delta();
        for phi in all_phis() {
            let g = OrliczGauge::build(phi.clone(), delta).unwrap();
            for t in test_grid().filter(|&t| t > delta) {
                let y = g.value(t).unwrap();
                let back = g.inverse(y).unwrap();
                assert!((back / t - 1.0).abs() < 1e-9, "{}: {t} -> {y} -> {back}", phi.name());
            }
        }
        // Away from saturation the round trip holds for small δ as well.
        for phi in [OrliczFunction::constant(), OrliczFunction::log_shift()] {
            let g = OrliczGauge::build(phi.clone(), 5e-4).unwrap();
            for t in test_grid().filter(|&t| t > 5e-4) {
                let back = g.inverse(g.value(t).unwrap()).unwrap();
                assert!((back / t - 1.0).abs() < 1e-9, "{}: {t}", phi.name());
            }
        }
    }

    #[test]
    fn numeric_and_closed_forms_agree() {
        let closed = OrliczGauge::build(OrliczFunction::power(1.5), 0.3).unwrap();
        let numeric = OrliczGauge::build(OrliczFunction::custom("t^1.5", |t| t.powf(1.5)), 0.3).unwrap();
        for t in [0.31, 1.0, 7.0, 300.0] {
            let (a, b) = (closed.value(t).unwrap(), numeric.value(t).unwrap());
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{t}: {a} vs {b}");
        }
        assert!((closed.sup() - numeric.sup()).abs() < 1e-10 * closed.sup());
        let y = 0.5 * closed.sup();
        assert!((closed.inverse(y).unwrap() - numeric.inverse(y).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn saturation_is_clamped() {
        let g = OrliczGauge::build(OrliczFunction::power(2.0), 0.5).unwrap();
        assert!(matches!(g.inverse(g.sup() + 1.0), Err(Error::GaugeSaturated { .. })));
        let (t, clamped) = g.inverse_clamped(g.sup()).unwrap();
        assert!(clamped && t.is_finite() && t > 0.5);
        let (_, clamped) = g.inverse_clamped(0.1).unwrap();
        assert!(!clamped);
    }

    #[test]
    fn invalid_delta() {
        assert_eq!(OrliczGauge::build(OrliczFunction::constant(), 0.0).unwrap_err(), Error::InvalidDelta(0.0));
    }
}
