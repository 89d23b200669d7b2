//! Problems, deviation classes, distributions and gap oracles.

mod distribution;
mod gap;
mod operator;
mod problem;

pub use distribution::{FiniteDistribution, WEIGHT_SUM_TOL};
pub use gap::{
    evi_gap, evi_gap_constants, evi_gap_linear, evi_gap_product, linear_payoff_coefficients, ConstantsGap, LinearGap,
    ProductGap,
};
#[allow(unused_imports)]
pub(crate) use gap::{constants_gap_from, evaluations, linear_gap_from};
pub use operator::{
    eval_polynomial, GameCoordinates, Monomial, Operator, OperatorKind, TableEntry, BOUND_SAMPLES, MAX_POLY_DEGREE,
};
pub use problem::{
    sample_collapse_flags, split_blocks, CollapseFlags, EVIProblem, PhiClass, ProblemFile, FLAG_SAMPLES,
};

use crate::error::Result;
use crate::tolerance::ToleranceConfig;

/// `F(x)` for a point of the problem's polytope.
pub fn evaluate_operator(p: &EVIProblem, x: &[f64], tol: &ToleranceConfig) -> Result<Vec<f64>> {
    p.evaluate(x, tol)
}
