//! Dense revised simplex on a standard-form program `min c'x, Ax = b, x >= 0`
//! with `b >= 0`. Pricing is by normalized reduced cost; after a run of
//! degenerate pivots it switches to Bland's rule until the objective
//! improves, so the method terminates on degenerate programs. `B^-1` is
//! kept explicitly and rebuilt from an LU factorization every few pivots.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tolerance::ToleranceConfig;

const REFACTOR_EVERY: usize = 32;
/// Consecutive non-improving pivots (at least the row count) after which
/// pricing falls back to Bland's rule until the objective moves again.
const BLAND_AFTER: usize = 16;

/// Relative size below which a pivot element is refused while another
/// improving column is available.
const STABLE_PIVOT: f64 = 1e-7;

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Column-major dense matrix with `m` rows.
#[derive(Debug, Clone)]
pub(crate) struct Columns {
    pub m: usize,
    n: usize,
    pub data: Vec<f64>,
}

impl Columns {
    pub fn new(m: usize) -> Self {
        Self { m, n: 0, data: Vec::new() }
    }

    pub fn ncols(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, col: &[f64]) -> usize {
        debug_assert_eq!(col.len(), self.m);
        self.data.extend_from_slice(col);
        self.n += 1;
        self.n - 1
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.m..(j + 1) * self.m]
    }
}

pub(crate) enum PhaseResult {
    Optimal,
    Unbounded,
}

pub(crate) struct Tableau<'a> {
    m: usize,
    a: &'a Columns,
    /// Columns that are never allowed to hold a basis position the pricing
    /// could grow (artificials in phase 2).
    n_cols: usize,
    b: &'a [f64],
    pub basis: Vec<usize>,
    position: Vec<Option<usize>>,
    /// Row-major `m x m` inverse of the basis matrix.
    binv: Vec<f64>,
    pub xb: Vec<f64>,
    since_refactor: usize,
    pub pivots: usize,
    tol: ToleranceConfig,
}

impl<'a> Tableau<'a> {
    pub fn new(a: &'a Columns, b: &'a [f64], basis: Vec<usize>, tol: ToleranceConfig) -> Result<Self> {
        let m = a.m;
        let n_cols = a.ncols();
        let mut position = vec![None; n_cols];
        for (r, &j) in basis.iter().enumerate() {
            position[j] = Some(r);
        }
        let mut t = Self {
            m,
            a,
            n_cols,
            b,
            basis,
            position,
            binv: vec![0.0; m * m],
            xb: vec![0.0; m],
            since_refactor: 0,
            pivots: 0,
            tol,
        };
        t.refactor()?;
        Ok(t)
    }

    pub fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        self.since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        let bmat = DMatrix::from_fn(m, m, |i, k| self.a.col(self.basis[k])[i]);
        let inv = bmat
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("singular basis matrix".into()))?;
        for i in 0..m {
            for k in 0..m {
                self.binv[i * m + k] = inv[(i, k)];
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(self.b).map(|(x, y)| x * y).sum();
            self.xb[i] = v;
        }
        Ok(())
    }

    /// Simplex multipliers `y = c_B' B^-1`.
    pub fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (k, &j) in self.basis.iter().enumerate() {
            let cb = cost[j];
            if cb != 0.0 {
                let row = &self.binv[k * m..(k + 1) * m];
                for (yi, r) in y.iter_mut().zip(row) {
                    *yi += cb * r;
                }
            }
        }
        y
    }

    pub fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        let col = self.a.col(j);
        cost[j] - col.iter().zip(y).map(|(a, y)| a * y).sum::<f64>()
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let col = self.a.col(j);
        (0..m)
            .map(|k| {
                self.binv[k * m..(k + 1) * m]
                    .iter()
                    .zip(col)
                    .map(|(x, y)| x * y)
                    .sum()
            })
            .collect()
    }

    /// Row `r` of `B^-1 A` restricted to column `j`.
    pub fn tableau_entry(&self, r: usize, j: usize) -> f64 {
        let m = self.m;
        self.binv[r * m..(r + 1) * m]
            .iter()
            .zip(self.a.col(j))
            .map(|(x, y)| x * y)
            .sum()
    }

    pub fn is_basic(&self, j: usize) -> bool {
        self.position[j].is_some()
    }

    pub fn pivot(&mut self, r: usize, j: usize) -> Result<()> {
        let w = self.ftran(j);
        self.pivot_with(r, j, &w)
    }

    fn pivot_with(&mut self, r: usize, j: usize, w: &[f64]) -> Result<()> {
        let m = self.m;
        let wr = w[r];
        if wr.abs() < self.tol.pivot * 1e-3 {
            return Err(Error::NumericalFailure(format!("pivot element {wr:e} too small")));
        }
        let t = self.xb[r].max(0.0) / wr;
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (prow, after) = rest.split_at_mut(m);
        for v in prow.iter_mut() {
            *v /= wr;
        }
        for k in 0..m {
            if k == r {
                continue;
            }
            let wk = w[k];
            if wk == 0.0 {
                continue;
            }
            let row = if k < r {
                &mut before[k * m..(k + 1) * m]
            } else {
                &mut after[(k - r - 1) * m..(k - r) * m]
            };
            for (v, p) in row.iter_mut().zip(prow.iter()) {
                *v -= wk * p;
            }
            self.xb[k] -= wk * t;
            if self.xb[k] < 0.0 && self.xb[k] > -self.tol.feas {
                self.xb[k] = 0.0;
            }
        }
        self.xb[r] = t;
        let old = self.basis[r];
        self.position[old] = None;
        self.position[j] = Some(r);
        self.basis[r] = j;
        self.pivots += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        Ok(())
    }

    /// Runs simplex iterations for `cost` until optimality or unboundedness.
    /// Only columns with `allowed[j]` may enter the basis.
    pub fn optimize(&mut self, cost: &[f64], allowed: &[bool], max_pivots: usize) -> Result<PhaseResult> {
        let cscale = 1.0 + cost.iter().fold(0.0_f64, |acc, c| acc.max(c.abs()));
        let opt_tol = self.tol.optimality * cscale;
        let mut degenerate_run = 0usize;
        // Columns whose only pivots are unstable; cleared after each pivot.
        let mut rejected = vec![false; self.n_cols];
        loop {
            if self.pivots > max_pivots {
                return Err(Error::NumericalFailure(format!(
                    "simplex exceeded {max_pivots} pivots"
                )));
            }
            let y = self.duals(cost);
            let improving = (0..self.n_cols)
                .filter(|&j| allowed[j] && !rejected[j] && !self.is_basic(j))
                .map(|j| (j, self.reduced_cost(cost, &y, j)))
                .filter(|(_, d)| *d < -opt_tol);
            let entering = if degenerate_run >= self.m.max(BLAND_AFTER) {
                // Bland: lowest-index improving column enters.
                improving.map(|(j, _)| j).next()
            } else {
                // Steepest normalized reduced cost; ties go to the lower index.
                improving
                    .map(|(j, d)| (j, d / (1.0 + norm2(self.a.col(j)))))
                    .fold(None, |best: Option<(usize, f64)>, (j, v)| match best {
                        Some((_, bv)) if bv <= v => best,
                        _ => Some((j, v)),
                    })
                    .map(|(j, _)| j)
            };
            let Some(j) = entering else {
                if rejected.iter().any(|r| *r) {
                    return Err(Error::NumericalFailure("only unstable pivots remain".into()));
                }
                return Ok(PhaseResult::Optimal);
            };
            let w = self.ftran(j);
            let wmax = w.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            let piv_tol = self.tol.pivot * wmax.max(1.0);
            // Harris two-pass ratio test: bound the step with every ratio
            // relaxed by the feasibility tolerance, then among the rows that
            // block within that bound keep the lowest basic index whose pivot
            // is within a factor ten of the largest.
            let feas = self.tol.feas;
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            let mut bound = f64::INFINITY;
            for (k, &wk) in w.iter().enumerate() {
                // A basic column that may not enter (an artificial left at
                // zero after phase 1) must stay at zero in either direction.
                let pinned = !allowed[self.basis[k]];
                let (mag, level) = if pinned { (wk.abs(), 0.0) } else { (wk, self.xb[k].max(0.0)) };
                if mag <= piv_tol {
                    continue;
                }
                bound = bound.min((level + feas) / mag);
                cands.push((k, mag, level / mag));
            }
            let biggest = cands
                .iter()
                .filter(|c| c.2 <= bound)
                .fold(0.0_f64, |acc, c| acc.max(c.1));
            let leave = cands
                .iter()
                .filter(|c| c.2 <= bound && c.1 >= 0.1 * biggest)
                .min_by_key(|c| self.basis[c.0])
                .map(|c| (c.0, c.2));
            let Some((r, _)) = leave else {
                return Ok(PhaseResult::Unbounded);
            };
            if biggest < STABLE_PIVOT * wmax.max(1.0) {
                rejected[j] = true;
                continue;
            }
            rejected.iter_mut().for_each(|r| *r = false);
            let before = self.objective(cost);
            self.pivot_with(r, j, &w)?;
            if self.objective(cost) < before - opt_tol * 1e-3 {
                degenerate_run = 0;
            } else {
                degenerate_run += 1;
            }
        }
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis.iter().zip(&self.xb).map(|(&j, v)| cost[j] * v).sum()
    }

    pub fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_cols];
        for (k, &j) in self.basis.iter().enumerate() {
            x[j] = self.xb[k].max(0.0);
        }
        x
    }
}
