//! Gap oracles: how much a deviation class gains against a distribution.
//!
//! Every gap is `-min_phi E<F(x), phi(x) - x>`; `raw` keeps the sign, `gap`
//! is clamped at zero for reporting.

use serde::{Deserialize, Serialize};

use super::distribution::FiniteDistribution;
use super::problem::{split_blocks, EVIProblem, PhiClass};
use crate::endomap::{minimize_over_endos, AffineEndo, EndoWitness};
use crate::error::{check_dim, Result};
use crate::polytope::Polytope;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsGap {
    pub raw: f64,
    pub gap: f64,
    /// Best constant deviation `x'`.
    pub deviation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearGap {
    pub raw: f64,
    pub gap: f64,
    /// Best affine deviation.
    pub deviation: AffineEndo,
    pub witness: EndoWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductGap {
    pub raw: f64,
    pub gap: f64,
    pub blocks: Vec<LinearGap>,
}

/// `F` evaluated on the support, with domain checks.
pub(crate) fn evaluations(p: &EVIProblem, mu: &FiniteDistribution, tol: &ToleranceConfig) -> Result<Vec<Vec<f64>>> {
    check_dim("distribution dimension", mu.dim(), p.dim())?;
    mu.support().iter().map(|x| p.evaluate(x, tol)).collect()
}

/// Coefficients of `E<F(x), Kx + c - x>`: `G = E[F x']`, `g = E[F]`, and the
/// constant `E<F(x), x>`.
pub fn linear_payoff_coefficients(
    points: &[Vec<f64>],
    values: &[Vec<f64>],
    weights: &[f64],
) -> (Vec<f64>, Vec<f64>, f64) {
    let d = points[0].len();
    let mut g_mat = vec![0.0; d * d];
    let mut g_vec = vec![0.0; d];
    let mut constant = 0.0;
    for ((x, f), &w) in points.iter().zip(values).zip(weights) {
        for r in 0..d {
            let wf = w * f[r];
            g_vec[r] += wf;
            for s in 0..d {
                g_mat[r * d + s] += wf * x[s];
            }
            constant += wf * x[r];
        }
    }
    (g_mat, g_vec, constant)
}

pub(crate) fn constants_gap_from(
    x_set: &Polytope,
    points: &[Vec<f64>],
    values: &[Vec<f64>],
    weights: &[f64],
    tol: &ToleranceConfig,
) -> Result<ConstantsGap> {
    let (_, g_vec, constant) = linear_payoff_coefficients(points, values, weights);
    let (dev, min) = x_set.minimize(&g_vec, tol)?;
    let raw = constant - min;
    Ok(ConstantsGap { raw, gap: raw.max(0.0), deviation: dev })
}

pub(crate) fn linear_gap_from(
    x_set: &Polytope,
    points: &[Vec<f64>],
    values: &[Vec<f64>],
    weights: &[f64],
    tol: &ToleranceConfig,
) -> Result<LinearGap> {
    let (g_mat, g_vec, constant) = linear_payoff_coefficients(points, values, weights);
    let (min, deviation, witness) = minimize_over_endos(x_set, &g_mat, &g_vec, tol)?;
    let raw = constant - min;
    Ok(LinearGap { raw, gap: raw.max(0.0), deviation, witness })
}

/// Gap against constant deviations.
pub fn evi_gap_constants(p: &EVIProblem, mu: &FiniteDistribution, tol: &ToleranceConfig) -> Result<ConstantsGap> {
    let values = evaluations(p, mu, tol)?;
    constants_gap_from(&p.polytope, mu.support(), &values, mu.weights(), tol)
}

/// Gap against all affine self-maps of `X`.
pub fn evi_gap_linear(p: &EVIProblem, mu: &FiniteDistribution, tol: &ToleranceConfig) -> Result<LinearGap> {
    let values = evaluations(p, mu, tol)?;
    linear_gap_from(&p.polytope, mu.support(), &values, mu.weights(), tol)
}

/// Gap against blockwise affine self-maps: the sum of per-block gaps.
pub fn evi_gap_product(
    p: &EVIProblem,
    sizes: &[usize],
    mu: &FiniteDistribution,
    tol: &ToleranceConfig,
) -> Result<ProductGap> {
    let values = evaluations(p, mu, tol)?;
    let mut blocks = Vec::new();
    let mut raw = 0.0;
    for (range, block) in split_blocks(&p.polytope, sizes)? {
        let pts: Vec<Vec<f64>> = mu.support().iter().map(|x| x[range.clone()].to_vec()).collect();
        let vals: Vec<Vec<f64>> = values.iter().map(|f| f[range.clone()].to_vec()).collect();
        let g = linear_gap_from(&block, &pts, &vals, mu.weights(), tol)?;
        raw += g.raw;
        blocks.push(g);
    }
    Ok(ProductGap { raw, gap: raw.max(0.0), blocks })
}

/// Raw gap for the problem's own deviation class.
pub fn evi_gap(p: &EVIProblem, mu: &FiniteDistribution, tol: &ToleranceConfig) -> Result<f64> {
    match &p.phi {
        PhiClass::Constants => Ok(evi_gap_constants(p, mu, tol)?.raw),
        PhiClass::Linear => Ok(evi_gap_linear(p, mu, tol)?.raw),
        PhiClass::ProductLinear(sizes) => Ok(evi_gap_product(p, sizes, mu, tol)?.raw),
    }
}
