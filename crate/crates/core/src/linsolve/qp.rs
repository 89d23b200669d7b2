//! Euclidean projection onto `{z : Az <= b}` by a dual active-set method.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lp::{solve_lp, Bound, LinearProgram, LpStatus, Sense};
use crate::error::{check_dim, Error, Result};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub point: Vec<f64>,
    /// KKT multipliers, one per input row (zero off the active set).
    pub multipliers: Vec<f64>,
    pub kkt_residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// KKT residual of `z` with multipliers `mu` for projecting `p` onto `Az <= b`:
/// the largest of stationarity, primal infeasibility, negative multipliers
/// and complementarity, each relative to the problem scale.
pub fn projection_kkt_residual(p: &[f64], a: &[f64], b: &[f64], z: &[f64], mu: &[f64]) -> f64 {
    let d = p.len();
    let m = b.len();
    let scale = 1.0 + p.iter().chain(z).fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut stat: Vec<f64> = z.iter().zip(p).map(|(z, p)| z - p).collect();
    let mut worst = 0.0_f64;
    for i in 0..m {
        let row = &a[i * d..(i + 1) * d];
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let slack = b[i] - dot(row, z);
        worst = worst.max((-slack).max(0.0) / (norm * scale));
        worst = worst.max((-mu[i]).max(0.0));
        worst = worst.max((mu[i] * slack).abs() / scale);
        for (s, r) in stat.iter_mut().zip(row) {
            *s += mu[i] * r;
        }
    }
    let stat_norm = stat.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    worst.max(stat_norm / scale)
}

/// Projects `point` onto `{z : Az <= b}` (`a` row-major, `b.len()` rows)
/// with the Goldfarb-Idnani dual active-set method: start from the point
/// itself and repeatedly enforce the most violated row, dropping active rows
/// whose multiplier would turn negative. Active rows stay linearly
/// independent, so degenerate vertices need no special care.
pub fn project_polytope(point: &[f64], a: &[f64], b: &[f64], tol: &ToleranceConfig) -> Result<Projection> {
    let d = point.len();
    let m = b.len();
    check_dim("projection constraint matrix", a.len(), m * d)?;
    if point.iter().chain(a).chain(b).any(|v| !v.is_finite()) {
        return Err(Error::DomainError("projection input has non-finite entries".into()));
    }

    // Work with unit-norm rows; multipliers are rescaled on the way out.
    let mut norms = vec![0.0; m];
    let mut an = vec![0.0; m * d];
    let mut bn = vec![0.0; m];
    for i in 0..m {
        let row = &a[i * d..(i + 1) * d];
        let nrm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        norms[i] = nrm;
        if nrm > 0.0 {
            for k in 0..d {
                an[i * d + k] = row[k] / nrm;
            }
            bn[i] = b[i] / nrm;
        } else if b[i] < -tol.feas {
            return Err(Error::DomainError(format!("row {i} reads 0 <= {}", b[i])));
        }
    }
    let scale = 1.0
        + point.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
        + bn.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let feas_tol = tol.feas * scale;
    let row = |i: usize| &an[i * d..(i + 1) * d];

    let max_iter = 50 * (m + d) + 1000;
    let mut z = point.to_vec();
    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let mut iterations = 0;
    'outer: loop {
        // Most violated row.
        let mut q: Option<(usize, f64)> = None;
        for i in 0..m {
            if norms[i] == 0.0 || active.contains(&i) {
                continue;
            }
            let viol = dot(row(i), &z) - bn[i];
            if viol > feas_tol && q.map_or(true, |(_, v)| viol > v) {
                q = Some((i, viol));
            }
        }
        let Some((q, _)) = q else { break };
        let mut uq = 0.0;
        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::NumericalFailure(format!(
                    "active-set projection did not converge in {max_iter} iterations"
                )));
            }
            let nq = row(q);
            // Split the new row into its span component over the active rows
            // (coefficients r) and the orthogonal remainder (primal direction).
            let r = span_coefficients(&an, d, &active, nq)?;
            let mut dir: Vec<f64> = nq.to_vec();
            for (k, &i) in active.iter().enumerate() {
                for (v, a) in dir.iter_mut().zip(row(i)) {
                    *v -= r[k] * a;
                }
            }
            let dd = dot(&dir, &dir);
            let full = if dd > 1e-20 { Some((dot(nq, &z) - bn[q]) / dd) } else { None };
            let mut partial: Option<(usize, f64)> = None;
            for (k, &rk) in r.iter().enumerate() {
                if rk > 1e-12 {
                    let t = u[k] / rk;
                    if partial.map_or(true, |(_, best)| t < best) {
                        partial = Some((k, t));
                    }
                }
            }
            let t = match (full, partial) {
                (None, None) => return feasible_point(a, b, d, tol).and_then(|_| {
                    Err(Error::NumericalFailure("projection found no step on a feasible set".into()))
                }),
                (Some(f), Some((_, p))) => f.min(p),
                (Some(f), None) => f,
                (None, Some((_, p))) => p,
            };
            if full.is_some() {
                for (zk, v) in z.iter_mut().zip(&dir) {
                    *zk -= t * v;
                }
            }
            for (uk, rk) in u.iter_mut().zip(&r) {
                *uk -= t * rk;
            }
            uq += t;
            match (full, partial) {
                (Some(f), p) if p.map_or(true, |(_, pt)| f <= pt) => {
                    active.push(q);
                    u.push(uq);
                    continue 'outer;
                }
                (_, Some((k, _))) => {
                    active.remove(k);
                    u.remove(k);
                }
                _ => unreachable!(),
            }
        }
    }

    let mut multipliers = vec![0.0; m];
    for (k, &i) in active.iter().enumerate() {
        multipliers[i] = u[k].max(0.0) / norms[i];
    }
    let kkt = projection_kkt_residual(point, a, b, &z, &multipliers);
    if kkt > tol.proj {
        return Err(Error::NumericalFailure(format!("projection KKT residual {kkt:e}")));
    }
    Ok(Projection { point: z, multipliers, kkt_residual: kkt, iterations })
}

/// Least-squares coefficients of `v` on the active rows.
fn span_coefficients(an: &[f64], d: usize, active: &[usize], v: &[f64]) -> Result<Vec<f64>> {
    let k = active.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let g = DMatrix::from_fn(k, d, |i, j| an[active[i] * d + j]);
    let gram = &g * g.transpose();
    let rhs = &g * DVector::from_column_slice(v);
    let r = gram
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("dependent active constraints in projection".into()))?
        .solve(&rhs);
    Ok(r.as_slice().to_vec())
}

/// A point of `{z : Az <= b}`, or the Farkas certificate of its emptiness.
pub fn feasible_point(a: &[f64], b: &[f64], d: usize, tol: &ToleranceConfig) -> Result<Vec<f64>> {
    let mut lp = LinearProgram::feasibility(d);
    for (i, &bi) in b.iter().enumerate() {
        lp.add_row(&a[i * d..(i + 1) * d], Sense::Le, bi);
    }
    lp.set_bounds(0..d, Bound::FREE);
    let out = solve_lp(&lp, tol)?;
    match out.status {
        LpStatus::Optimal => Ok(out.primal),
        LpStatus::Infeasible => Err(Error::Infeasible(Box::new(
            out.farkas.expect("infeasible outcome carries a certificate"),
        ))),
        LpStatus::Unbounded => Err(Error::NumericalFailure("feasibility program reported unbounded".into())),
    }
}
