//! Dense LP and projection engine.

mod lp;
mod qp;
mod simplex;

pub use lp::{
    primal_residual, solve_lp, Bound, Direction, FarkasCertificate, LinearProgram, LpOutcome, LpStatus, Sense,
};
pub use qp::{feasible_point, project_polytope, projection_kkt_residual, Projection};

use crate::error::{Error, Result};

/// Returns the outcome if optimal, otherwise maps the status to an error.
pub fn expect_optimal(out: LpOutcome, what: &str) -> Result<LpOutcome> {
    match out.status {
        LpStatus::Optimal => Ok(out),
        LpStatus::Infeasible => Err(Error::Infeasible(Box::new(
            out.farkas.expect("infeasible outcome carries a certificate"),
        ))),
        LpStatus::Unbounded => Err(Error::NumericalFailure(format!("{what} is unbounded"))),
    }
}
