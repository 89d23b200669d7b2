use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::Polytope;

/// A finitely supported distribution over `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct FiniteDistribution {
    support: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DistributionRepr {
    support: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<DistributionRepr> for FiniteDistribution {
    type Error = Error;

    fn try_from(r: DistributionRepr) -> Result<Self> {
        FiniteDistribution::new(r.support, r.weights)
    }
}

impl From<FiniteDistribution> for DistributionRepr {
    fn from(d: FiniteDistribution) -> Self {
        DistributionRepr { support: d.support, weights: d.weights }
    }
}

pub const WEIGHT_SUM_TOL: f64 = 1e-12;

impl FiniteDistribution {
    pub fn new(support: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvariantViolation("distribution needs at least one support point".into()));
        }
        if support.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} support points with {} weights",
                support.len(),
                weights.len()
            )));
        }
        let d = support[0].len();
        for (t, x) in support.iter().enumerate() {
            if x.len() != d {
                return Err(Error::DimensionMismatch(format!("support point {t} has dimension {}", x.len())));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvariantViolation(format!("support point {t} is not finite")));
            }
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvariantViolation("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvariantViolation(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { support, weights })
    }

    /// Normalizes nonnegative weights before building.
    pub fn normalized(support: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvariantViolation("weights must have positive mass".into()));
        }
        Self::new(support, weights.iter().map(|w| w / total).collect())
    }

    pub fn point_mass(x: Vec<f64>) -> Self {
        Self::new(vec![x], vec![1.0]).expect("point mass is valid")
    }

    pub fn uniform(support: Vec<Vec<f64>>) -> Result<Self> {
        let n = support.len();
        Self::normalized(support, vec![1.0; n])
    }

    pub fn support(&self) -> &[Vec<f64>] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.support[0].len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.support.iter().map(|x| x.as_slice()).zip(self.weights.iter().copied())
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (x, w) in self.iter() {
            for (mi, xi) in m.iter_mut().zip(x) {
                *mi += w * xi;
            }
        }
        m
    }

    /// `alpha * self + (1 - alpha) * other`, keeping both supports.
    pub fn mixture(&self, other: &Self, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::DomainError(format!("mixture weight {alpha} outside [0, 1]")));
        }
        let mut support = self.support.clone();
        support.extend(other.support.iter().cloned());
        let mut weights: Vec<f64> = self.weights.iter().map(|w| alpha * w).collect();
        weights.extend(other.weights.iter().map(|w| (1.0 - alpha) * w));
        Self::normalized(support, weights)
    }

    /// Fails with `DomainError` when a support point lies outside `X`.
    pub fn check_support(&self, x_set: &Polytope, tol: f64) -> Result<()> {
        for (t, x) in self.support.iter().enumerate() {
            if x.len() != x_set.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "support point {t} has dimension {}, polytope has {}",
                    x.len(),
                    x_set.dim()
                )));
            }
            let m = x_set.membership(x, tol)?;
            if !m.inside {
                return Err(Error::DomainError(format!(
                    "support point {t} violates row {} by {:e}",
                    m.separator.unwrap_or(0),
                    m.max_violation
                )));
            }
        }
        Ok(())
    }
}
