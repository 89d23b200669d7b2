//! Explicit H-representation polytopes `{x : Ax <= b}`.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::evicore::Operator;
use crate::linsolve::{expect_optimal, solve_lp, Bound, Direction, LinearProgram, LpStatus, Sense};
use crate::tolerance::ToleranceConfig;

/// Vertex enumeration guard.
pub const MAX_ENUM_DIM: usize = 4;
pub const MAX_ENUM_ROWS: usize = 32;

/// Largest outer radius accepted when an interior is required.
pub const MAX_OUTER_RADIUS: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeSpec {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeSpec", into = "PolytopeSpec")]
pub struct Polytope {
    name: String,
    dim: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    outer_radius: f64,
    center: Vec<f64>,
    inner_radius: f64,
    witness: Vec<f64>,
}

impl TryFrom<PolytopeSpec> for Polytope {
    type Error = Error;

    fn try_from(spec: PolytopeSpec) -> Result<Self> {
        Polytope::from_spec(&spec)
    }
}

impl From<Polytope> for PolytopeSpec {
    fn from(p: Polytope) -> Self {
        p.to_spec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub inside: bool,
    /// Most violated row `a_i' x <= b_i` when outside.
    pub separator: Option<usize>,
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexList {
    pub source: String,
    pub vertices: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Polytope {
    /// Builds and certifies a polytope from rows of `A` and `b`.
    pub fn new(rows: &[Vec<f64>], b: &[f64], name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        check_dim("polytope rows", rows.len(), b.len())?;
        let d = rows.first().map(|r| r.len()).unwrap_or(0);
        if d == 0 {
            return Err(Error::InvariantViolation("polytope must have dimension >= 1".into()));
        }
        let mut flat = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::DimensionMismatch(format!("row {i} has {} entries, expected {d}", r.len())));
            }
            flat.extend_from_slice(r);
        }
        Self::from_flat(d, flat, b.to_vec(), name)
    }

    pub fn from_flat(dim: usize, a: Vec<f64>, b: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        check_dim("polytope matrix", a.len(), dim * b.len())?;
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvariantViolation(format!("polytope '{name}' has non-finite entries")));
        }
        let tol = ToleranceConfig::default();
        let m = b.len();
        let base = |objective: Vec<f64>, direction: Direction| {
            let mut lp = LinearProgram::new(direction, objective);
            for i in 0..m {
                lp.add_row(&a[i * dim..(i + 1) * dim], Sense::Le, b[i]);
            }
            lp
        };

        let feas = solve_lp(&base(vec![0.0; dim], Direction::Minimize), &tol)?;
        if feas.status == LpStatus::Infeasible {
            return Err(Error::InvariantViolation(format!("polytope '{name}' is empty")));
        }
        let witness = feas.primal;

        let mut lower = vec![0.0; dim];
        let mut upper = vec![0.0; dim];
        for j in 0..dim {
            for (dir, slot) in [(Direction::Minimize, &mut lower), (Direction::Maximize, &mut upper)] {
                let mut obj = vec![0.0; dim];
                obj[j] = 1.0;
                let out = solve_lp(&base(obj, dir), &tol)?;
                if out.status != LpStatus::Optimal {
                    return Err(Error::InvariantViolation(format!(
                        "polytope '{name}' is unbounded along coordinate {j}"
                    )));
                }
                slot[j] = out.objective;
            }
        }
        let outer_radius = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| l.abs().max(u.abs()).powi(2))
            .sum::<f64>()
            .sqrt();

        // Chebyshev center: max r subject to a_i'x + |a_i| r <= b_i.
        let mut obj = vec![0.0; dim + 1];
        obj[dim] = 1.0;
        let mut lp = LinearProgram::new(Direction::Maximize, obj);
        for i in 0..m {
            let row = &a[i * dim..(i + 1) * dim];
            let mut r = row.to_vec();
            r.push(dot(row, row).sqrt());
            lp.add_row(&r, Sense::Le, b[i]);
        }
        lp.set_bound(dim, Bound::NONNEG);
        let out = expect_optimal(solve_lp(&lp, &tol)?, "Chebyshev center program")?;
        let inner_radius = out.primal[dim].max(0.0);
        let center = out.primal[..dim].to_vec();

        Ok(Self { name, dim, a, b, lower, upper, outer_radius, center, inner_radius, witness })
    }

    pub fn from_spec(spec: &PolytopeSpec) -> Result<Self> {
        Self::new(&spec.a, &spec.b, spec.name.clone())
    }

    pub fn to_spec(&self) -> PolytopeSpec {
        PolytopeSpec {
            a: (0..self.rows()).map(|i| self.row(i).to_vec()).collect(),
            b: self.b.clone(),
            name: self.name.clone(),
        }
    }

    /// The box `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        let mut rows = Vec::with_capacity(2 * dim);
        let mut b = Vec::with_capacity(2 * dim);
        for j in 0..dim {
            let mut r = vec![0.0; dim];
            r[j] = 1.0;
            rows.push(r);
            b.push(hi);
        }
        for j in 0..dim {
            let mut r = vec![0.0; dim];
            r[j] = -1.0;
            rows.push(r);
            b.push(-lo);
        }
        Self::new(&rows, &b, format!("cube[{lo},{hi}]^{dim}"))
    }

    /// The probability simplex in `R^n`, with `sum x = 1` as two rows.
    pub fn simplex(n: usize) -> Result<Self> {
        let mut rows = Vec::with_capacity(n + 2);
        let mut b = Vec::with_capacity(n + 2);
        for j in 0..n {
            let mut r = vec![0.0; n];
            r[j] = -1.0;
            rows.push(r);
            b.push(0.0);
        }
        rows.push(vec![1.0; n]);
        b.push(1.0);
        rows.push(vec![-1.0; n]);
        b.push(-1.0);
        Self::new(&rows, &b, format!("simplex^{n}"))
    }

    /// Cartesian product, with coordinates concatenated in order.
    pub fn product(parts: &[Polytope]) -> Result<Self> {
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        let mut rows = Vec::new();
        let mut b = Vec::new();
        let mut offset = 0;
        for p in parts {
            for i in 0..p.rows() {
                let mut r = vec![0.0; dim];
                r[offset..offset + p.dim].copy_from_slice(p.row(i));
                rows.push(r);
                b.push(p.b[i]);
            }
            offset += p.dim;
        }
        let name = parts.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(" x ");
        Self::new(&rows, &b, name)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.b.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major constraint matrix.
    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// The feasible point found when the polytope was certified nonempty.
    pub fn witness(&self) -> &[f64] {
        &self.witness
    }

    pub fn coordinate_bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    /// Preconditions of the ellipsoid solver: a nonempty interior and a
    /// moderate outer radius.
    pub fn require_well_conditioned(&self) -> Result<()> {
        if self.inner_radius <= 1e-9 {
            return Err(Error::InvariantViolation(format!(
                "polytope '{}' has empty interior (inner radius {:e})",
                self.name, self.inner_radius
            )));
        }
        if self.outer_radius > MAX_OUTER_RADIUS {
            return Err(Error::InvariantViolation(format!(
                "polytope '{}' has outer radius {:e} above {MAX_OUTER_RADIUS:e}",
                self.name, self.outer_radius
            )));
        }
        Ok(())
    }

    pub fn slack(&self, i: usize, x: &[f64]) -> f64 {
        self.b[i] - dot(self.row(i), x)
    }

    pub fn membership(&self, x: &[f64], tol: f64) -> Result<Membership> {
        check_dim("point", x.len(), self.dim)?;
        let mut worst: Option<(usize, f64)> = None;
        for i in 0..self.rows() {
            let v = -self.slack(i, x);
            if worst.map_or(true, |(_, w)| v > w) {
                worst = Some((i, v));
            }
        }
        let (i, v) = worst.unwrap_or((0, f64::NEG_INFINITY));
        let inside = v <= tol;
        Ok(Membership { inside, separator: if inside { None } else { Some(i) }, max_violation: v.max(0.0) })
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim && (0..self.rows()).all(|i| self.slack(i, x) >= -tol)
    }

    /// A linear program over `X` with the given objective.
    pub fn lp(&self, direction: Direction, objective: Vec<f64>) -> LinearProgram {
        let mut lp = LinearProgram::new(direction, objective);
        for i in 0..self.rows() {
            lp.add_row(self.row(i), Sense::Le, self.b[i]);
        }
        lp
    }

    /// `min_{x in X} <c, x>` with a minimizer.
    pub fn minimize(&self, c: &[f64], tol: &ToleranceConfig) -> Result<(Vec<f64>, f64)> {
        check_dim("objective", c.len(), self.dim)?;
        let out = expect_optimal(solve_lp(&self.lp(Direction::Minimize, c.to_vec()), tol)?, "linear program over X")?;
        Ok((out.primal, out.objective))
    }

    pub fn maximize(&self, c: &[f64], tol: &ToleranceConfig) -> Result<(Vec<f64>, f64)> {
        check_dim("objective", c.len(), self.dim)?;
        let out = expect_optimal(solve_lp(&self.lp(Direction::Maximize, c.to_vec()), tol)?, "linear program over X")?;
        Ok((out.primal, out.objective))
    }

    /// `-min_{x' in X} <g, x' - x>`: the VI gap at `x` for the direction `g = F(x)`.
    pub fn linear_gap(&self, g: &[f64], x: &[f64], tol: &ToleranceConfig) -> Result<f64> {
        check_dim("point", x.len(), self.dim)?;
        let (_, min) = self.minimize(g, tol)?;
        Ok(dot(g, x) - min)
    }

    /// Vertex enumeration by a breadth-first walk along edges, starting at an
    /// LP vertex. Desk-scale only.
    pub fn enumerate_vertices(&self) -> Result<VertexList> {
        let d = self.dim;
        let m = self.rows();
        if d > MAX_ENUM_DIM || m > MAX_ENUM_ROWS {
            return Err(Error::TooLarge(format!(
                "vertex enumeration needs d <= {MAX_ENUM_DIM} and m <= {MAX_ENUM_ROWS}, got d = {d}, m = {m}"
            )));
        }
        let tol = ToleranceConfig::default();
        let tight_tol = 1e-9;
        // A generic objective gives a vertex; a lexicographic polish would
        // also work but is unnecessary since only tightness is used below.
        let obj: Vec<f64> = (0..d).map(|j| 1.0 + 0.1 * j as f64 + 0.013 * (j * j) as f64).collect();
        let (start, _) = self.minimize(&obj, &tol)?;
        let start = self.snap_to_vertex(start)?;

        let mut found: Vec<Vec<f64>> = vec![start.clone()];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let tight: Vec<usize> = (0..m).filter(|&i| self.slack(i, &v).abs() <= tight_tol * (1.0 + self.b[i].abs())).collect();
            for subset in subsets(&tight, d - 1) {
                let Some(e) = edge_direction(self, &subset) else {
                    continue;
                };
                for sign in [1.0, -1.0] {
                    let dir: Vec<f64> = e.iter().map(|v| sign * v).collect();
                    let mut step = f64::INFINITY;
                    let mut blocked_now = false;
                    for i in 0..m {
                        let ad = dot(self.row(i), &dir);
                        if ad <= 1e-12 {
                            continue;
                        }
                        let s = self.slack(i, &v).max(0.0) / ad;
                        if s <= 1e-12 {
                            blocked_now = true;
                            break;
                        }
                        step = step.min(s);
                    }
                    if blocked_now || !step.is_finite() {
                        continue;
                    }
                    let w: Vec<f64> = v.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
                    let w = self.snap_to_vertex(w)?;
                    if !found.iter().any(|u| same_point(u, &w)) {
                        found.push(w.clone());
                        queue.push_back(w);
                    }
                }
            }
        }
        found.sort_by(|a, b| a.partial_cmp(b).expect("finite vertices"));
        Ok(VertexList { source: self.name.clone(), vertices: found })
    }

    /// Recomputes a vertex from its tight rows to remove drift.
    fn snap_to_vertex(&self, v: Vec<f64>) -> Result<Vec<f64>> {
        let d = self.dim;
        let tight: Vec<usize> = (0..self.rows())
            .filter(|&i| self.slack(i, &v).abs() <= 1e-7 * (1.0 + self.b[i].abs()))
            .collect();
        if tight.len() < d {
            return Err(Error::NumericalFailure("walk left the vertex set".into()));
        }
        // Greedily pick d independent tight rows and solve the square system.
        let mut chosen: Vec<usize> = Vec::with_capacity(d);
        for &i in &tight {
            let mut trial = chosen.clone();
            trial.push(i);
            let m = DMatrix::from_fn(trial.len(), d, |r, j| self.row(trial[r])[j]);
            let sv = m.singular_values();
            if sv.min() > 1e-9 * sv.max().max(1.0) {
                chosen = trial;
                if chosen.len() == d {
                    break;
                }
            }
        }
        if chosen.len() < d {
            return Err(Error::NumericalFailure("walk left the vertex set".into()));
        }
        let a = DMatrix::from_fn(d, d, |r, j| self.row(chosen[r])[j]);
        let b = nalgebra::DVector::from_iterator(d, chosen.iter().map(|&i| self.b[i]));
        let sol = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::NumericalFailure("vertex snap failed".into()))?;
        let snapped: Vec<f64> = sol.iter().copied().collect();
        if self.contains(&snapped, 1e-9) {
            Ok(snapped)
        } else {
            Ok(v)
        }
    }

    /// Deterministic pseudo-random feasible points (hit-and-run from the
    /// Chebyshev center, mixed with combinations of LP vertices so that
    /// flat polytopes are covered).
    pub fn sample<R: Rng>(&self, rng: &mut R, count: usize, tol: &ToleranceConfig) -> Result<Vec<Vec<f64>>> {
        let d = self.dim;
        let mut pool: Vec<Vec<f64>> = Vec::new();
        match self.enumerate_vertices() {
            Ok(v) => pool = v.vertices,
            Err(Error::TooLarge(_)) => {
                for _ in 0..(4 * d).max(8) {
                    let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    pool.push(self.minimize(&c, tol)?.0);
                }
            }
            Err(e) => return Err(e),
        }
        let mut out = Vec::with_capacity(count);
        let mut x = self.center.clone();
        for k in 0..count {
            if k % 2 == 0 && self.inner_radius > 1e-9 {
                let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for i in 0..self.rows() {
                    let ad = dot(self.row(i), &dir);
                    let s = self.slack(i, &x).max(0.0);
                    if ad > 1e-14 {
                        hi = hi.min(s / ad);
                    } else if ad < -1e-14 {
                        lo = lo.max(s / ad);
                    }
                }
                if lo.is_finite() && hi.is_finite() && hi > lo {
                    let t = rng.gen_range(lo..=hi);
                    x = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
                }
                out.push(x.clone());
            } else {
                let w: Vec<f64> = pool.iter().map(|_| -rng.gen_range(1e-12_f64..1.0).ln()).collect();
                let total: f64 = w.iter().sum();
                let mut p = vec![0.0; d];
                for (wk, v) in w.iter().zip(&pool) {
                    for (pj, vj) in p.iter_mut().zip(v) {
                        *pj += wk / total * vj;
                    }
                }
                out.push(p);
            }
        }
        Ok(out)
    }
}

/// `VIGap(x) = -min_{x' in X} <F(x), x' - x>`.
pub fn vi_gap(x_set: &Polytope, f: &Operator, x: &[f64], tol: &ToleranceConfig) -> Result<f64> {
    let g = f.evaluate(x)?;
    x_set.linear_gap(&g, x, tol)
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())))
}

/// Unit direction spanning the null space of the given rows, if they have
/// rank `d - 1`.
fn edge_direction(p: &Polytope, rows: &[usize]) -> Option<Vec<f64>> {
    let d = p.dim;
    if rows.is_empty() {
        return (d == 1).then(|| vec![1.0]);
    }
    let a = DMatrix::from_fn(d, d, |r, j| if r < rows.len() { p.row(rows[r])[j] } else { 0.0 });
    let svd = a.svd(false, true);
    let vt = svd.v_t?;
    let sv = &svd.singular_values;
    let smax = sv.max();
    let rank = sv.iter().filter(|s| **s > 1e-10 * smax.max(1.0)).count();
    if rank != d - 1 {
        return None;
    }
    let (k, _) = sv.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))?;
    Some(vt.row(k).iter().copied().collect())
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}
