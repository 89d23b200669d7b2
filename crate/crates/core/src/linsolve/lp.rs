use log::warn;
use serde::{Deserialize, Serialize};

use super::simplex::{Columns, PhaseResult, Tableau};
use crate::error::{Error, Result};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub const FREE: Bound = Bound { lower: f64::NEG_INFINITY, upper: f64::INFINITY };
    pub const NONNEG: Bound = Bound { lower: 0.0, upper: f64::INFINITY };

    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }
}

/// A dense linear program. Variables are free unless a bound is set.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub direction: Direction,
    pub objective: Vec<f64>,
    /// Row-major constraint matrix, `rows() x vars()`.
    pub matrix: Vec<f64>,
    pub senses: Vec<Sense>,
    pub rhs: Vec<f64>,
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    pub fn new(direction: Direction, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            direction,
            objective,
            matrix: Vec::new(),
            senses: Vec::new(),
            rhs: Vec::new(),
            bounds: vec![Bound::FREE; n],
        }
    }

    pub fn feasibility(n: usize) -> Self {
        Self::new(Direction::Minimize, vec![0.0; n])
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.vars();
        &self.matrix[i * n..(i + 1) * n]
    }

    pub fn add_row(&mut self, coeffs: &[f64], sense: Sense, rhs: f64) -> usize {
        assert_eq!(coeffs.len(), self.vars(), "row length must match variable count");
        self.matrix.extend_from_slice(coeffs);
        self.senses.push(sense);
        self.rhs.push(rhs);
        self.rhs.len() - 1
    }

    pub fn add_sparse_row(&mut self, entries: &[(usize, f64)], sense: Sense, rhs: f64) -> usize {
        let n = self.vars();
        let start = self.matrix.len();
        self.matrix.resize(start + n, 0.0);
        for &(j, v) in entries {
            self.matrix[start + j] += v;
        }
        self.senses.push(sense);
        self.rhs.push(rhs);
        self.rhs.len() - 1
    }

    pub fn set_bound(&mut self, j: usize, bound: Bound) {
        self.bounds[j] = bound;
    }

    pub fn set_bounds(&mut self, range: std::ops::Range<usize>, bound: Bound) {
        for j in range {
            self.bounds[j] = bound;
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.vars();
        let m = self.rows();
        if self.matrix.len() != n * m || self.senses.len() != m || self.bounds.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "linear program with {n} variables and {m} rows has inconsistent storage"
            )));
        }
        let finite = self.objective.iter().chain(&self.matrix).chain(&self.rhs).all(|v| v.is_finite());
        if !finite {
            return Err(Error::DomainError("linear program has non-finite entries".into()));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lower.is_nan() || b.upper.is_nan() || b.lower > b.upper || b.lower == f64::INFINITY || b.upper == f64::NEG_INFINITY {
                return Err(Error::DomainError(format!("invalid bound on variable {j}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Nonnegative combination of `<=` rows (free on `=` rows) plus variable-bound
/// multipliers proving that no point satisfies the program:
/// `rows' A + bounds = 0` and `rows' b + sum(bound terms) < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub rows: Vec<f64>,
    /// Positive entries multiply upper bounds, negative entries lower bounds.
    pub bounds: Vec<f64>,
    /// The (negative) right-hand side of the implied inequality `0 <= value`.
    pub value: f64,
}

impl FarkasCertificate {
    /// Largest entry of `rows' A + bounds` and the implied right-hand side.
    pub fn check(&self, lp: &LinearProgram) -> (f64, f64) {
        let n = lp.vars();
        let mut combo = self.bounds.clone();
        for (i, &f) in self.rows.iter().enumerate() {
            if f != 0.0 {
                for (c, a) in combo.iter_mut().zip(lp.row(i)) {
                    *c += f * a;
                }
            }
        }
        let resid = combo.iter().take(n).fold(0.0_f64, |acc, v| acc.max(v.abs()));
        (resid, implied_rhs(lp, &self.rows, &self.bounds))
    }
}

fn implied_rhs(lp: &LinearProgram, rows: &[f64], bounds: &[f64]) -> f64 {
    let mut value: f64 = rows.iter().zip(&lp.rhs).map(|(f, b)| f * b).sum();
    for (g, bd) in bounds.iter().zip(&lp.bounds) {
        if *g > 0.0 {
            value += g * bd.upper;
        } else if *g < 0.0 {
            value += g * bd.lower;
        }
    }
    value
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// Sensitivity of the optimal value to each row's right-hand side.
    pub dual: Vec<f64>,
    pub farkas: Option<FarkasCertificate>,
    pub objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub pivots: usize,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// How an original variable is written in terms of standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + sign * s`
    Single { col: usize, offset: f64, sign: f64 },
    /// `x = s+ - s-`
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    a: Columns,
    b: Vec<f64>,
    cost: Vec<f64>,
    cost_offset: f64,
    /// Sign applied to each standard row so that `b >= 0`.
    row_sign: Vec<f64>,
    /// Original row index for each standard row (`None` for bound rows).
    row_origin: Vec<Option<usize>>,
    vars: Vec<VarMap>,
    n_struct: usize,
    /// Standard-form columns usable for the initial basis, one per row.
    initial: Vec<Option<usize>>,
}

fn to_standard(lp: &LinearProgram, keep: &[usize]) -> StandardForm {
    let n = lp.vars();
    let sign = if lp.direction == Direction::Maximize { -1.0 } else { 1.0 };
    let mut vars = Vec::with_capacity(n);
    let mut ncol = 0usize;
    let mut upper_rows: Vec<(usize, f64)> = Vec::new();
    for b in &lp.bounds {
        let lo = b.lower.is_finite();
        let hi = b.upper.is_finite();
        let map = if lo {
            if hi {
                upper_rows.push((ncol, b.upper - b.lower));
            }
            VarMap::Single { col: ncol, offset: b.lower, sign: 1.0 }
        } else if hi {
            VarMap::Single { col: ncol, offset: b.upper, sign: -1.0 }
        } else {
            ncol += 1;
            VarMap::Split { pos: ncol - 1, neg: ncol }
        };
        ncol += 1;
        vars.push(map);
    }
    let n_struct = ncol;
    let m_std = keep.len() + upper_rows.len();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m_std);
    let mut rhs = Vec::with_capacity(m_std);
    let mut has_slack = Vec::with_capacity(m_std);
    let mut row_origin = Vec::with_capacity(m_std);
    for &i in keep {
        let mut r = vec![0.0; n_struct];
        let mut bi = lp.rhs[i];
        for (j, &aij) in lp.row(i).iter().enumerate() {
            if aij == 0.0 {
                continue;
            }
            match vars[j] {
                VarMap::Single { col, offset, sign } => {
                    r[col] += aij * sign;
                    bi -= aij * offset;
                }
                VarMap::Split { pos, neg } => {
                    r[pos] += aij;
                    r[neg] -= aij;
                }
            }
        }
        rows.push(r);
        rhs.push(bi);
        has_slack.push(lp.senses[i] == Sense::Le);
        row_origin.push(Some(i));
    }
    for &(col, width) in &upper_rows {
        let mut r = vec![0.0; n_struct];
        r[col] = 1.0;
        rows.push(r);
        rhs.push(width);
        has_slack.push(true);
        row_origin.push(None);
    }
    let n_slack = has_slack.iter().filter(|s| **s).count();
    let mut a = Columns::new(m_std);
    let mut row_sign = vec![1.0; m_std];
    for (i, r) in rhs.iter_mut().enumerate() {
        if *r < 0.0 {
            row_sign[i] = -1.0;
            *r = -*r;
        }
    }
    let mut col = vec![0.0; m_std];
    for j in 0..n_struct {
        for i in 0..m_std {
            col[i] = row_sign[i] * rows[i][j];
        }
        a.push(&col);
    }
    let mut initial = vec![None; m_std];
    for i in 0..m_std {
        if has_slack[i] {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[i] = row_sign[i];
            let j = a.push(&col);
            if row_sign[i] > 0.0 {
                initial[i] = Some(j);
            }
        }
    }
    debug_assert_eq!(a.ncols(), n_struct + n_slack);
    let mut cost = vec![0.0; a.ncols()];
    let mut cost_offset = 0.0;
    for (j, &cj) in lp.objective.iter().enumerate() {
        let cj = sign * cj;
        match vars[j] {
            VarMap::Single { col, offset, sign } => {
                cost[col] += cj * sign;
                cost_offset += cj * offset;
            }
            VarMap::Split { pos, neg } => {
                cost[pos] += cj;
                cost[neg] -= cj;
            }
        }
    }
    StandardForm { a, b: rhs, cost, cost_offset, row_sign, row_origin, vars, n_struct, initial }
}

fn row_scale(lp: &LinearProgram, i: usize, x: &[f64]) -> f64 {
    let xs = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let an = lp.row(i).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    1.0 + lp.rhs[i].abs() + an * xs
}

/// Largest scaled violation of rows and bounds at `x`.
pub fn primal_residual(lp: &LinearProgram, x: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..lp.rows() {
        let ax: f64 = lp.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
        let viol = match lp.senses[i] {
            Sense::Le => (ax - lp.rhs[i]).max(0.0),
            Sense::Eq => (ax - lp.rhs[i]).abs(),
        };
        worst = worst.max(viol / row_scale(lp, i, x));
    }
    for (v, b) in x.iter().zip(&lp.bounds) {
        worst = worst.max((b.lower - v).max(0.0) / (1.0 + b.lower.abs()));
        worst = worst.max((v - b.upper).max(0.0) / (1.0 + b.upper.abs()));
    }
    worst
}

fn infeasible_outcome(lp: &LinearProgram, rows: Vec<f64>, bounds: Vec<f64>, pivots: usize) -> LpOutcome {
    let n = lp.vars();
    let scale = rows
        .iter()
        .chain(&bounds)
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let rows: Vec<f64> = rows.iter().map(|v| v / scale).collect();
    let bounds: Vec<f64> = bounds.iter().map(|v| v / scale).collect();
    let value = implied_rhs(lp, &rows, &bounds);
    LpOutcome {
        status: LpStatus::Infeasible,
        primal: vec![0.0; n],
        dual: vec![0.0; lp.rows()],
        farkas: Some(FarkasCertificate { rows, bounds, value }),
        objective: f64::NAN,
        dual_objective: f64::NAN,
        primal_residual: f64::NAN,
        pivots,
    }
}

/// Solves `lp` with a two-phase revised simplex under Bland's rule.
pub fn solve_lp(lp: &LinearProgram, tol: &ToleranceConfig) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.vars();
    let m = lp.rows();

    // All-zero rows carry no information about x; drop them, or report a
    // one-row certificate if they are contradictory.
    let mut keep = Vec::with_capacity(m);
    for i in 0..m {
        if lp.row(i).iter().all(|v| *v == 0.0) {
            let b = lp.rhs[i];
            let bad = match lp.senses[i] {
                Sense::Le => b < -tol.feas,
                Sense::Eq => b.abs() > tol.feas,
            };
            if bad {
                let mut rows = vec![0.0; m];
                rows[i] = if b < 0.0 { 1.0 } else { -1.0 };
                return Ok(infeasible_outcome(lp, rows, vec![0.0; n], 0));
            }
            warn!("dropping all-zero constraint row {i}");
            continue;
        }
        keep.push(i);
    }

    let sf = to_standard(lp, &keep);
    let m_std = sf.b.len();
    let mut a = sf.a.clone();
    let n_real = a.ncols();
    let mut basis = Vec::with_capacity(m_std);
    let mut unit = vec![0.0; m_std];
    for i in 0..m_std {
        match sf.initial[i] {
            Some(j) => basis.push(j),
            None => {
                unit.iter_mut().for_each(|v| *v = 0.0);
                unit[i] = 1.0;
                basis.push(a.push(&unit));
            }
        }
    }
    let n_total = a.ncols();
    let max_pivots = 50_000 + 200 * (m_std + n_total);
    let mut tab = Tableau::new(&a, &sf.b, basis, *tol)?;

    if n_total > n_real {
        let mut cost1 = vec![0.0; n_total];
        cost1[n_real..].iter_mut().for_each(|v| *v = 1.0);
        let allowed = vec![true; n_total];
        tab.optimize(&cost1, &allowed, max_pivots)?;
        tab.refactor()?;
        let infeas: f64 = tab
            .basis
            .iter()
            .zip(&tab.xb)
            .filter(|(j, _)| **j >= n_real)
            .map(|(_, v)| v.max(0.0))
            .sum();
        let bscale = 1.0 + sf.b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if infeas > tol.feas * bscale {
            let y = tab.duals(&cost1);
            return Ok(farkas_from_phase1(lp, &sf, &y, tab.pivots));
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m_std {
            if tab.basis[r] < n_real {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n_real {
                if tab.is_basic(j) {
                    continue;
                }
                let e = tab.tableau_entry(r, j).abs();
                if e > 1e-7 && best.map_or(true, |(_, b)| e > b * 10.0) {
                    best = Some((j, e));
                }
            }
            if let Some((j, _)) = best {
                tab.pivot(r, j)?;
            }
        }
    }

    let mut cost2 = sf.cost.clone();
    cost2.resize(n_total, 0.0);
    let mut allowed = vec![true; n_total];
    allowed[n_real..].iter_mut().for_each(|v| *v = false);
    let phase = tab.optimize(&cost2, &allowed, max_pivots)?;
    tab.refactor()?;
    if let PhaseResult::Unbounded = phase {
        return Ok(LpOutcome {
            status: LpStatus::Unbounded,
            primal: recover_primal(&sf, &tab.primal(), n),
            dual: vec![0.0; m],
            farkas: None,
            objective: if lp.direction == Direction::Minimize { f64::NEG_INFINITY } else { f64::INFINITY },
            dual_objective: f64::NAN,
            primal_residual: f64::NAN,
            pivots: tab.pivots,
        });
    }
    // A refactorization can expose a few reduced costs that drifted; polish.
    tab.optimize(&cost2, &allowed, max_pivots)?;

    let xs = tab.primal();
    let x = recover_primal(&sf, &xs, n);
    let y = tab.duals(&cost2);
    let dir = if lp.direction == Direction::Maximize { -1.0 } else { 1.0 };
    let mut dual = vec![0.0; m];
    for (k, origin) in sf.row_origin.iter().enumerate() {
        if let Some(i) = origin {
            dual[*i] = dir * sf.row_sign[k] * y[k];
        }
    }
    let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let dual_std: f64 = y.iter().zip(&sf.b).map(|(y, b)| y * b).sum::<f64>() + sf.cost_offset;
    let dual_objective = dir * dual_std;
    let resid = primal_residual(lp, &x);
    if resid > tol.feas * 1e3 {
        return Err(Error::NumericalFailure(format!("primal residual {resid:e} after simplex")));
    }
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        primal: x,
        dual,
        farkas: None,
        objective,
        dual_objective,
        primal_residual: resid,
        pivots: tab.pivots,
    })
}

fn recover_primal(sf: &StandardForm, xs: &[f64], n: usize) -> Vec<f64> {
    debug_assert!(xs.len() >= sf.n_struct);
    let mut x = vec![0.0; n];
    for (j, map) in sf.vars.iter().enumerate() {
        x[j] = match *map {
            VarMap::Single { col, offset, sign } => offset + sign * xs[col],
            VarMap::Split { pos, neg } => xs[pos] - xs[neg],
        };
    }
    x
}

fn farkas_from_phase1(lp: &LinearProgram, sf: &StandardForm, y: &[f64], pivots: usize) -> LpOutcome {
    // Phase-1 optimality gives A_std' y <= 0 and b_std' y > 0. Flipping the
    // sign and undoing the row normalisation yields multipliers on the
    // original rows that are nonnegative on <= rows.
    let m = lp.rows();
    let n = lp.vars();
    let mut rows = vec![0.0; m];
    for (k, origin) in sf.row_origin.iter().enumerate() {
        if let Some(i) = origin {
            let f = -sf.row_sign[k] * y[k];
            rows[*i] = match lp.senses[*i] {
                Sense::Le => f.max(0.0),
                Sense::Eq => f,
            };
        }
    }
    let mut bounds = vec![0.0; n];
    for (i, &f) in rows.iter().enumerate() {
        if f != 0.0 {
            for (g, a) in bounds.iter_mut().zip(lp.row(i)) {
                *g -= f * a;
            }
        }
    }
    // Bound multipliers on infinite sides are numerically zero; drop them.
    for (g, b) in bounds.iter_mut().zip(&lp.bounds) {
        let scale = 1e-9 * (1.0 + g.abs());
        if (*g > 0.0 && !b.upper.is_finite()) || (*g < 0.0 && !b.lower.is_finite()) {
            if g.abs() <= scale.max(1e-9) {
                *g = 0.0;
            }
        }
    }
    infeasible_outcome(lp, rows, bounds, pivots)
}
