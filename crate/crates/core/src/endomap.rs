//! Affine self-maps `x -> Kx + c` of a polytope `X = {Ax <= b}`.
//!
//! `(K, c)` maps `X` into itself iff some `V >= 0` has `VA = AK` and
//! `Vb <= b - Ac`. Row `i` of that system is an LP in row `i` of `V` whose
//! dual is `max_{x in X} a_i'Kx`, so membership decomposes row by row and a
//! violated row comes with the vertex `x*` whose image leaves `X`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linsolve::{
    expect_optimal, project_polytope, solve_lp, Bound, Direction, LinearProgram, LpStatus, Sense,
};
use crate::polytope::Polytope;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EndoRepr", into = "EndoRepr")]
pub struct AffineEndo {
    dim: usize,
    /// Row-major `d x d`.
    k: Vec<f64>,
    c: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EndoRepr {
    #[serde(rename = "K")]
    k: Vec<Vec<f64>>,
    c: Vec<f64>,
}

impl TryFrom<EndoRepr> for AffineEndo {
    type Error = Error;

    fn try_from(r: EndoRepr) -> Result<Self> {
        let d = r.c.len();
        check_dim("K rows", r.k.len(), d)?;
        let mut k = Vec::with_capacity(d * d);
        for (i, row) in r.k.iter().enumerate() {
            if row.len() != d {
                return Err(Error::ParseError(format!("K row {i} has {} entries, expected {d}", row.len())));
            }
            k.extend_from_slice(row);
        }
        AffineEndo::new(d, k, r.c)
    }
}

impl From<AffineEndo> for EndoRepr {
    fn from(e: AffineEndo) -> Self {
        let d = e.dim;
        EndoRepr { k: (0..d).map(|i| e.k[i * d..(i + 1) * d].to_vec()).collect(), c: e.c }
    }
}

impl AffineEndo {
    pub fn new(dim: usize, k: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        check_dim("K", k.len(), dim * dim)?;
        check_dim("c", c.len(), dim)?;
        if k.iter().chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::DomainError("affine map has non-finite entries".into()));
        }
        Ok(Self { dim, k, c })
    }

    pub fn identity(dim: usize) -> Self {
        let mut k = vec![0.0; dim * dim];
        for i in 0..dim {
            k[i * dim + i] = 1.0;
        }
        Self { dim, k, c: vec![0.0; dim] }
    }

    pub fn constant(x: &[f64]) -> Self {
        let dim = x.len();
        Self { dim, k: vec![0.0; dim * dim], c: x.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|i| self.c[i] + self.k[i * d..(i + 1) * d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    /// Coordinates `[vec(K) row-major; c]` in `R^{d^2 + d}`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut y = self.k.clone();
        y.extend_from_slice(&self.c);
        y
    }

    pub fn from_vec(dim: usize, y: &[f64]) -> Result<Self> {
        check_dim("deviation vector", y.len(), dim * dim + dim)?;
        Self::new(dim, y[..dim * dim].to_vec(), y[dim * dim..].to_vec())
    }

    /// Residual `|Kx + c - x|_inf`.
    pub fn fixed_point_residual(&self, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Nonnegative `V` (row-major `m x m`) certifying membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndoWitness {
    pub m: usize,
    pub v: Vec<f64>,
}

impl EndoWitness {
    /// Largest violation among `V >= 0`, `VA = AK` and `Vb <= b - Ac`.
    pub fn residual(&self, x_set: &Polytope, phi: &AffineEndo) -> f64 {
        let d = x_set.dim();
        let m = self.m;
        let a = x_set.matrix();
        let b = x_set.rhs();
        let mut worst = self.v.iter().fold(0.0_f64, |acc, v| acc.max(-v));
        for i in 0..m {
            for j in 0..d {
                let va: f64 = (0..m).map(|k| self.v[i * m + k] * a[k * d + j]).sum();
                let ak: f64 = (0..d).map(|k| a[i * d + k] * phi.k[k * d + j]).sum();
                worst = worst.max((va - ak).abs());
            }
            let vb: f64 = (0..m).map(|k| self.v[i * m + k] * b[k]).sum();
            let ac: f64 = (0..d).map(|k| a[i * d + k] * phi.c[k]).sum();
            worst = worst.max(vb + ac - b[i]);
        }
        worst
    }
}

/// A unit-norm halfspace `<h, y> <= rhs` in deviation coordinates that every
/// member of the endomorphism polytope satisfies and the queried map violates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub h: Vec<f64>,
    pub rhs: f64,
    /// `<h, y>` at the queried map.
    pub value: f64,
    /// Violated row of `X` and the point of `X` whose image violates it.
    pub row: usize,
    pub point: Vec<f64>,
}

impl Separation {
    pub fn eval(&self, phi: &AffineEndo) -> f64 {
        self.h.iter().zip(phi.to_vec()).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EndoMembership {
    Member(EndoWitness),
    NonMember(Separation),
}

impl EndoMembership {
    pub fn is_member(&self) -> bool {
        matches!(self, EndoMembership::Member(_))
    }
}

fn membership_slack(x_set: &Polytope, tol: &ToleranceConfig) -> f64 {
    tol.feas * (1.0 + x_set.outer_radius())
}

pub fn endo_membership(x_set: &Polytope, phi: &AffineEndo, tol: &ToleranceConfig) -> Result<EndoMembership> {
    check_dim("map dimension", phi.dim, x_set.dim())?;
    let d = x_set.dim();
    let m = x_set.rows();
    let a = x_set.matrix();
    let b = x_set.rhs();
    let slack = membership_slack(x_set, tol);
    let mut v = vec![0.0; m * m];
    let mut worst: Option<(usize, f64)> = None;
    for i in 0..m {
        // min b'v  s.t.  A'v = K'a_i, v >= 0
        let target: Vec<f64> = (0..d).map(|j| (0..d).map(|k| a[i * d + k] * phi.k[k * d + j]).sum()).collect();
        let mut lp = LinearProgram::new(Direction::Minimize, b.to_vec());
        lp.set_bounds(0..m, Bound::NONNEG);
        for j in 0..d {
            let col: Vec<f64> = (0..m).map(|k| a[k * d + j]).collect();
            lp.add_row(&col, Sense::Eq, target[j]);
        }
        let out = expect_optimal(solve_lp(&lp, tol)?, "endomorphism row program")?;
        let ac: f64 = (0..d).map(|k| a[i * d + k] * phi.c[k]).sum();
        let excess = out.objective + ac - b[i];
        v[i * m..(i + 1) * m].copy_from_slice(&out.primal);
        if excess > slack && worst.map_or(true, |(_, w)| excess > w) {
            worst = Some((i, excess));
        }
    }
    let Some((i, _)) = worst else {
        return Ok(EndoMembership::Member(EndoWitness { m, v }));
    };
    Ok(EndoMembership::NonMember(separation_for_row(x_set, phi, i, tol)?))
}

/// Cut from row `i`: `a_i'(K x* + c) <= b_i` with `x*` maximizing `a_i'Kx`.
fn separation_for_row(x_set: &Polytope, phi: &AffineEndo, i: usize, tol: &ToleranceConfig) -> Result<Separation> {
    let d = x_set.dim();
    let ai = x_set.row(i);
    let dir: Vec<f64> = (0..d).map(|j| (0..d).map(|k| ai[k] * phi.k[k * d + j]).sum()).collect();
    let (xs, _) = x_set.maximize(&dir, tol)?;
    let mut h = Vec::with_capacity(d * d + d);
    for r in 0..d {
        for s in 0..d {
            h.push(ai[r] * xs[s]);
        }
    }
    h.extend_from_slice(ai);
    let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::NumericalFailure("zero separating functional".into()));
    }
    h.iter_mut().for_each(|v| *v /= norm);
    let rhs = x_set.rhs()[i] / norm;
    let value = h.iter().zip(phi.to_vec()).map(|(a, b)| a * b).sum();
    Ok(Separation { h, rhs, value, row: i, point: xs })
}

/// A point `x in X` with `|Kx + c - x|_inf <= tol.fixed_point`.
pub fn fixed_point(x_set: &Polytope, phi: &AffineEndo, tol: &ToleranceConfig) -> Result<Vec<f64>> {
    check_dim("map dimension", phi.dim, x_set.dim())?;
    let d = x_set.dim();
    let mut lp = x_set.lp(Direction::Minimize, vec![0.0; d]);
    for i in 0..d {
        let mut row = phi.k[i * d..(i + 1) * d].to_vec();
        row[i] -= 1.0;
        if row.iter().all(|v| *v == 0.0) {
            // x_i = x_i + c_i; consistent iff c_i is zero.
            if phi.c[i].abs() > tol.fixed_point {
                return fixed_point_l1(x_set, phi, tol);
            }
            continue;
        }
        lp.add_row(&row, Sense::Eq, -phi.c[i]);
    }
    match solve_lp(&lp, tol) {
        Ok(out) if out.status == LpStatus::Optimal => {
            if phi.fixed_point_residual(&out.primal) <= tol.fixed_point {
                return Ok(out.primal);
            }
            fixed_point_l1(x_set, phi, tol)
        }
        Ok(_) | Err(Error::NumericalFailure(_)) => fixed_point_l1(x_set, phi, tol),
        Err(e) => Err(e),
    }
}

/// Fallback: minimize `|(K - I)x + c|_1` over `X`.
fn fixed_point_l1(x_set: &Polytope, phi: &AffineEndo, tol: &ToleranceConfig) -> Result<Vec<f64>> {
    let d = x_set.dim();
    // Variables: x (d, free), s+ (d), s- (d).
    let mut obj = vec![0.0; 3 * d];
    obj[d..].iter_mut().for_each(|v| *v = 1.0);
    let mut lp = LinearProgram::new(Direction::Minimize, obj);
    lp.set_bounds(d..3 * d, Bound::NONNEG);
    for i in 0..x_set.rows() {
        let mut row = x_set.row(i).to_vec();
        row.resize(3 * d, 0.0);
        lp.add_row(&row, Sense::Le, x_set.rhs()[i]);
    }
    for i in 0..d {
        let mut row = vec![0.0; 3 * d];
        row[..d].copy_from_slice(&phi.k[i * d..(i + 1) * d]);
        row[i] -= 1.0;
        row[d + i] = -1.0;
        row[2 * d + i] = 1.0;
        lp.add_row(&row, Sense::Eq, -phi.c[i]);
    }
    let out = expect_optimal(solve_lp(&lp, tol)?, "fixed-point residual program")?;
    let x = out.primal[..d].to_vec();
    let residual = phi.fixed_point_residual(&x);
    if residual <= tol.fixed_point {
        Ok(x)
    } else {
        Err(Error::NoFixedPointFound { residual, tolerance: tol.fixed_point })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SemiSeparation {
    FixedPoint(Vec<f64>),
    Separation(Separation),
}

/// Either a fixed point of `phi` in `X` or a halfspace separating `phi` from
/// the endomorphism polytope.
pub fn semi_separation(x_set: &Polytope, phi: &AffineEndo, tol: &ToleranceConfig) -> Result<SemiSeparation> {
    match endo_membership(x_set, phi, tol)? {
        EndoMembership::NonMember(s) => Ok(SemiSeparation::Separation(s)),
        EndoMembership::Member(_) => Ok(SemiSeparation::FixedPoint(fixed_point(x_set, phi, tol)?)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndoProjection {
    pub endo: AffineEndo,
    pub witness: EndoWitness,
    pub distance: f64,
    pub kkt_residual: f64,
    pub cuts: usize,
}

/// Projection onto the endomorphism polytope by cutting planes. Every cut
/// comes from a violated row and a vertex of `X`, so the pool is finite and
/// the loop stops once it holds every cut active at the projection. The pool
/// is kept between calls.
#[derive(Debug, Clone)]
pub struct EndoProjector {
    x_set: Polytope,
    h: Vec<f64>,
    rhs: Vec<f64>,
    tol: ToleranceConfig,
}

impl EndoProjector {
    pub fn new(x_set: &Polytope, tol: &ToleranceConfig) -> Self {
        Self { x_set: x_set.clone(), h: Vec::new(), rhs: Vec::new(), tol: *tol }
    }

    pub fn cut_count(&self) -> usize {
        self.rhs.len()
    }

    fn add_cut(&mut self, s: &Separation) {
        let n = s.h.len();
        let dup = (0..self.rhs.len()).any(|j| {
            (self.rhs[j] - s.rhs).abs() <= 1e-12 && self.h[j * n..(j + 1) * n].iter().zip(&s.h).all(|(a, b)| (a - b).abs() <= 1e-12)
        });
        if !dup {
            self.h.extend_from_slice(&s.h);
            self.rhs.push(s.rhs);
        }
    }

    pub fn project(&mut self, phi: &AffineEndo) -> Result<EndoProjection> {
        let d = self.x_set.dim();
        check_dim("map dimension", phi.dim, d)?;
        let target = phi.to_vec();
        let max_rounds = 20 * self.x_set.rows() * (d + 2) + 200;
        let mut current = phi.clone();
        let mut kkt = 0.0;
        // Whether `current` came out of a projection onto the pool.
        let mut projected = false;
        for _ in 0..max_rounds {
            match endo_membership(&self.x_set, &current, &self.tol)? {
                EndoMembership::Member(witness) => {
                    let y = current.to_vec();
                    let distance = y.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    return Ok(EndoProjection {
                        endo: current,
                        witness,
                        distance,
                        kkt_residual: kkt,
                        cuts: self.rhs.len(),
                    });
                }
                EndoMembership::NonMember(s) => {
                    let before = self.rhs.len();
                    self.add_cut(&s);
                    if self.rhs.len() == before && projected {
                        // The projection meets this cut only up to its own
                        // tolerance. Pull toward the constant map at the
                        // center, which satisfies every cut strictly.
                        let anchor = AffineEndo::constant(self.x_set.center());
                        let margin = s.rhs - s.eval(&anchor);
                        let excess = s.value - s.rhs;
                        if !(margin > 0.0) {
                            return Err(Error::NumericalFailure(
                                "endomorphism projection repeated a cut without progress".into(),
                            ));
                        }
                        let theta = (2.0 * excess / (excess + margin)).min(1.0);
                        let y: Vec<f64> = current
                            .to_vec()
                            .iter()
                            .zip(anchor.to_vec())
                            .map(|(c, a)| (1.0 - theta) * c + theta * a)
                            .collect();
                        current = AffineEndo::from_vec(d, &y)?;
                        projected = false;
                        continue;
                    }
                }
            }
            let proj = project_polytope(&target, &self.h, &self.rhs, &self.tol)?;
            kkt = proj.kkt_residual;
            current = AffineEndo::from_vec(d, &proj.point)?;
            projected = true;
        }
        Err(Error::IterationCapExceeded(max_rounds))
    }
}

/// One-shot projection of `phi` onto the endomorphism polytope of `X`.
pub fn endo_project(x_set: &Polytope, phi: &AffineEndo, tol: &ToleranceConfig) -> Result<EndoProjection> {
    EndoProjector::new(x_set, tol).project(phi)
}

/// `min <G, K> + <g, c>` over the endomorphism polytope, with a minimizer
/// and its witness. `G` is row-major `d x d`.
pub fn minimize_over_endos(
    x_set: &Polytope,
    g_mat: &[f64],
    g_vec: &[f64],
    tol: &ToleranceConfig,
) -> Result<(f64, AffineEndo, EndoWitness)> {
    let d = x_set.dim();
    let m = x_set.rows();
    check_dim("G", g_mat.len(), d * d)?;
    check_dim("g", g_vec.len(), d)?;
    let a = x_set.matrix();
    let b = x_set.rhs();
    let nk = d * d;
    let nv = m * m;
    let n = nk + d + nv;
    let mut obj = vec![0.0; n];
    obj[..nk].copy_from_slice(g_mat);
    obj[nk..nk + d].copy_from_slice(g_vec);
    let mut lp = LinearProgram::new(Direction::Minimize, obj);
    lp.set_bounds(nk + d..n, Bound::NONNEG);
    let v_idx = |i: usize, k: usize| nk + d + i * m + k;
    for i in 0..m {
        for j in 0..d {
            // sum_k V[i,k] A[k,j] - sum_k A[i,k] K[k,j] = 0
            let mut entries = Vec::with_capacity(m + d);
            for k in 0..m {
                entries.push((v_idx(i, k), a[k * d + j]));
            }
            for k in 0..d {
                entries.push((k * d + j, -a[i * d + k]));
            }
            lp.add_sparse_row(&entries, Sense::Eq, 0.0);
        }
        let mut entries = Vec::with_capacity(m + d);
        for k in 0..m {
            entries.push((v_idx(i, k), b[k]));
        }
        for k in 0..d {
            entries.push((nk + k, a[i * d + k]));
        }
        lp.add_sparse_row(&entries, Sense::Le, b[i]);
    }
    let out = expect_optimal(solve_lp(&lp, tol)?, "linear deviation program")?;
    let endo = AffineEndo::new(d, out.primal[..nk].to_vec(), out.primal[nk..nk + d].to_vec())?;
    let witness = EndoWitness { m, v: out.primal[nk + d..].iter().map(|v| v.max(0.0)).collect() };
    Ok((out.objective, endo, witness))
}
