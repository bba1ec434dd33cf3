use crate::cone::PointedCone;
use crate::error::{Error, Result};
use crate::linalg::{normalized, Vector};

const BISECTION_STEPS: usize = 60;

fn axis_of(c: &PointedCone) -> Vector {
    c.axis()
}

fn candidate(c: &PointedCone, beta: f64) -> Result<PointedCone> {
    let d = axis_of(c);
    let generators: Vec<Vector> = c
        .generators()
        .iter()
        .map(|w| normalized(&(w - &d * beta)).ok_or(Error::InvalidBeta { beta, max: f64::NAN }))
        .collect::<Result<_>>()?;
    if generators.iter().any(|w| w.dot(&d) <= 0.0) {
        return Err(Error::NotPointed);
    }
    let gamma = PointedCone::from_generators(generators)?;
    let contains_c = c.generators().iter().all(|w| gamma.contains(w, true));
    if !contains_c || gamma.generators().len() != c.generators().len() {
        return Err(Error::InvalidBeta { beta, max: f64::NAN });
    }
    Ok(gamma)
}

/// Largest `β` for which [`enlarge_cone`] yields a pointed cone strictly
/// containing `C`, found by bisection on that predicate.
pub fn beta_max(c: &PointedCone) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if candidate(c, mid).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `Γ(β)`, generated by `normalize(w_j - β d)` with `d` the axis of `C`.
pub fn enlarge_cone(c: &PointedCone, beta: f64) -> Result<PointedCone> {
    let max = beta_max(c);
    if !(beta > 0.0 && beta < max) {
        return Err(Error::InvalidBeta { beta, max });
    }
    candidate(c, beta).map_err(|_| Error::InvalidBeta { beta, max })
}
