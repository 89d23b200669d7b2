//! Ellipsoid `{y : (y - c)' P^-1 (y - c) <= 1}` with deep-cut updates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub center: DVector<f64>,
    pub shape: DMatrix<f64>,
    /// `ln det(shape)`, tracked from the update factors.
    pub log_det: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CutOutcome {
    /// The ellipsoid was replaced by the smallest one containing its part in
    /// the halfspace; `depth` is the normalized cut depth.
    Updated { depth: f64 },
    /// The halfspace misses the ellipsoid entirely.
    Empty,
    /// The halfspace contains the ellipsoid; nothing to do.
    Shallow,
}

impl Ellipsoid {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let n = center.len();
        if n < 2 {
            return Err(Error::DimensionMismatch("ellipsoid needs dimension >= 2".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::DomainError(format!("ball radius {radius}")));
        }
        Ok(Self {
            center: DVector::from_vec(center),
            shape: DMatrix::identity(n, n) * (radius * radius),
            log_det: n as f64 * (radius * radius).ln(),
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `ln vol` up to the unit-ball constant, i.e. `ln det / 2`.
    pub fn log_volume(&self) -> f64 {
        0.5 * self.log_det
    }

    /// Keeps the part of the ellipsoid in `{y : <a, y> <= beta}`.
    pub fn cut(&mut self, a: &[f64], beta: f64) -> Result<CutOutcome> {
        let n = self.dim() as f64;
        let a = DVector::from_column_slice(a);
        let pa = &self.shape * &a;
        let apa = a.dot(&pa);
        if !(apa.is_finite() && apa > 0.0) {
            return Err(Error::NumericalFailure(format!("degenerate ellipsoid (a'Pa = {apa:e})")));
        }
        let root = apa.sqrt();
        let alpha = (a.dot(&self.center) - beta) / root;
        if alpha >= 1.0 {
            return Ok(CutOutcome::Empty);
        }
        if alpha <= -1.0 / n {
            return Ok(CutOutcome::Shallow);
        }
        let tau = (1.0 + n * alpha) / (n + 1.0);
        let sigma = 2.0 * (1.0 + n * alpha) / ((n + 1.0) * (1.0 + alpha));
        let delta = n * n * (1.0 - alpha * alpha) / (n * n - 1.0);
        let b = pa / root;
        self.center -= &b * tau;
        let bbt = &b * b.transpose();
        self.shape = (&self.shape - bbt * sigma) * delta;
        // Keep the shape exactly symmetric.
        let sym = (&self.shape + self.shape.transpose()) * 0.5;
        self.shape = sym;
        self.log_det += n * delta.ln() + (1.0 - sigma).ln();
        Ok(CutOutcome::Updated { depth: alpha })
    }

    pub fn is_positive_definite(&self) -> bool {
        self.shape.clone().cholesky().is_some()
    }
}

/// Lower bound on the per-cut decrease of `ln det` for a central cut.
pub fn central_cut_log_det_drop(n: usize) -> f64 {
    let n = n as f64;
    let sigma = 2.0 / (n + 1.0);
    let delta = n * n / (n * n - 1.0);
    -(n * delta.ln() + (1.0 - sigma).ln())
}
