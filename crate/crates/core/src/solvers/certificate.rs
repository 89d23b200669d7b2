//! The weights `lambda` over candidate points that maximize the worst-case
//! payoff `min_{phi in Phi_LIN} sum_t lambda_t <F(x_t), phi(x_t) - x_t>`.
//!
//! The inner minimum over the endomorphism polytope is replaced by its LP
//! dual: with multipliers `Y` (m x d, free) on `VA = AK` and `z >= 0` on
//! `Vb + Ac <= b`, it equals `max -b'z` subject to `A'Y = G(lambda)`,
//! `A'z = -g(lambda)` and `Y A' + z b' >= 0`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linsolve::{solve_lp, Bound, Direction, LinearProgram, LpStatus, Sense};
use crate::polytope::Polytope;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub lambda: Vec<f64>,
    /// Worst-case payoff of the weighted points; `>= -eps` certifies them.
    pub value: f64,
}

/// The robust-value LP with variables `[lambda (T); Y (m*d); z (m)]`,
/// maximizing the worst-case payoff. Callers may add rows on `lambda`.
pub fn robust_value_lp(x_set: &Polytope, points: &[Vec<f64>], values: &[Vec<f64>]) -> Result<LinearProgram> {
    let t_count = points.len();
    check_dim("operator values", values.len(), t_count)?;
    let d = x_set.dim();
    let m = x_set.rows();
    let a = x_set.matrix();
    let b = x_set.rhs();
    let y0 = t_count;
    let z0 = y0 + m * d;
    let n = z0 + m;
    let y_idx = |i: usize, s: usize| y0 + i * d + s;

    let mut obj = vec![0.0; n];
    for t in 0..t_count {
        check_dim("candidate point", points[t].len(), d)?;
        check_dim("operator value", values[t].len(), d)?;
        obj[t] = -values[t].iter().zip(&points[t]).map(|(f, x)| f * x).sum::<f64>();
    }
    for i in 0..m {
        obj[z0 + i] = -b[i];
    }
    let mut lp = LinearProgram::new(Direction::Maximize, obj);
    lp.set_bounds(0..t_count, Bound::NONNEG);
    lp.set_bounds(z0..n, Bound::NONNEG);

    for r in 0..d {
        for s in 0..d {
            let mut e: Vec<(usize, f64)> = (0..m).map(|i| (y_idx(i, s), a[i * d + r])).collect();
            for t in 0..t_count {
                let c = values[t][r] * points[t][s];
                if c != 0.0 {
                    e.push((t, -c));
                }
            }
            lp.add_sparse_row(&e, Sense::Eq, 0.0);
        }
    }
    for r in 0..d {
        let mut e: Vec<(usize, f64)> = (0..m).map(|i| (z0 + i, a[i * d + r])).collect();
        for t in 0..t_count {
            if values[t][r] != 0.0 {
                e.push((t, values[t][r]));
            }
        }
        lp.add_sparse_row(&e, Sense::Eq, 0.0);
    }
    for i in 0..m {
        for k in 0..m {
            let mut e: Vec<(usize, f64)> = (0..d).map(|s| (y_idx(i, s), -a[k * d + s])).collect();
            e.push((z0 + i, -b[k]));
            lp.add_sparse_row(&e, Sense::Le, 0.0);
        }
    }
    lp.add_sparse_row(&(0..t_count).map(|t| (t, 1.0)).collect::<Vec<_>>(), Sense::Eq, 1.0);
    Ok(lp)
}

/// Best weights over the given points; `values[t] = F(points[t])`.
pub fn extract_certificate(
    x_set: &Polytope,
    points: &[Vec<f64>],
    values: &[Vec<f64>],
    tol: &ToleranceConfig,
) -> Result<Certificate> {
    if points.is_empty() {
        return Err(Error::DomainError("certificate needs at least one point".into()));
    }
    let lp = robust_value_lp(x_set, points, values)?;
    let out = solve_lp(&lp, tol)?;
    match out.status {
        LpStatus::Optimal => {
            let mut lambda: Vec<f64> = out.primal[..points.len()].iter().map(|v| v.max(0.0)).collect();
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|v| *v /= total);
            Ok(Certificate { lambda, value: out.objective })
        }
        LpStatus::Infeasible => Err(Error::NumericalFailure("certificate program reported infeasible".into())),
        LpStatus::Unbounded => Err(Error::NumericalFailure("certificate program reported unbounded".into())),
    }
}
