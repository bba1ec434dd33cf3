use crate::cone::PointedCone;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::pseudocone::validate_directions;

/// Finite measure `μ = Σ μ_i δ_{u_i}` on directions strictly inside `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    directions: Vec<Vector>,
    weights: Vec<f64>,
    total: f64,
}

impl DiscreteMeasure {
    pub fn new(cone: &PointedCone, directions: Vec<Vector>, weights: Vec<f64>) -> Result<Self> {
        let directions = validate_directions(&directions, cone.dim(), |u| cone.contains(u, true))?;
        if weights.len() != directions.len() {
            return Err(Error::DimensionMismatch { expected: directions.len(), found: weights.len() });
        }
        if let Some(index) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::NonPositiveValue { index, value: weights[index] });
        }
        let total = weights.iter().sum();
        Ok(Self { directions, weights, total })
    }

    pub fn directions(&self) -> &[Vector] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `μ(η)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `μ_i / μ(η)`.
    pub fn normalized(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total).collect()
    }
}
