//! Which marginals `(P[first action of player 1], P[first action of player 2])`
//! of a two-by-two game are attained by approximate linear-deviation
//! solutions supported on a fixed lattice.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::normal_form::NormalFormGame;
use crate::error::{Error, Result};
use crate::linsolve::{solve_lp, Bound, LinearProgram, LpStatus, Sense};
use crate::solvers::robust_value_lp;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    /// Spacing of the target grid.
    pub resolution: f64,
    /// Lattice points per axis of the support grid.
    pub support_points: usize,
    /// A target is feasible when the robust value is at least `-eps_region`.
    pub eps_region: f64,
    pub tol: ToleranceConfig,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self { resolution: 0.05, support_points: 21, eps_region: 1e-6, tol: ToleranceConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    /// Feasible with an infeasible grid neighbour.
    Boundary,
    Infeasible,
    /// The cell's program failed; never counted as feasible.
    Unknown,
}

impl Verdict {
    pub fn is_feasible(self) -> bool {
        matches!(self, Verdict::Feasible | Verdict::Boundary)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Feasible => "feasible",
            Verdict::Boundary => "boundary",
            Verdict::Infeasible => "infeasible",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub i: usize,
    pub j: usize,
    pub p: f64,
    pub q: f64,
    pub verdict: Verdict,
    /// Robust value of the best distribution with these marginals.
    pub value: Option<f64>,
}

/// Distance of boundary cells to the conic `10x^2 - 25xy + 10y^2 - 6x + 11y = 0`,
/// estimated to first order by `|f| / |grad f|`. Reported, never asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolaDiagnostic {
    pub boundary_cells: usize,
    pub within_two_cells: usize,
    pub max_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalRegionScan {
    pub game: String,
    pub resolution: f64,
    pub support_points: usize,
    pub eps_region: f64,
    /// Grid points per axis.
    pub size: usize,
    /// Row-major over `(i, j)` with `p = i h`, `q = j h`.
    pub cells: Vec<RegionCell>,
    pub hyperbola: HyperbolaDiagnostic,
}

impl MarginalRegionScan {
    pub fn cell(&self, i: usize, j: usize) -> &RegionCell {
        &self.cells[i * self.size + j]
    }

    /// The grid cell nearest to `(p, q)`.
    pub fn nearest(&self, p: f64, q: f64) -> &RegionCell {
        let k = |v: f64| ((v / self.resolution).round().max(0.0) as usize).min(self.size - 1);
        self.cell(k(p), k(q))
    }
}

/// Support lattice and operator values shared by every cell.
pub struct RegionProgram {
    points: Vec<Vec<f64>>,
    base: LinearProgram,
    tol: ToleranceConfig,
}

impl RegionProgram {
    pub fn new(g: &NormalFormGame, cfg: &RegionConfig) -> Result<Self> {
        if g.actions() != [2, 2] {
            return Err(Error::DimensionMismatch(format!(
                "region scans need a two-player two-action game, got {:?}",
                g.actions()
            )));
        }
        if cfg.support_points < 2 {
            return Err(Error::DomainError("support lattice needs at least two points per axis".into()));
        }
        let n = cfg.support_points;
        let step = 1.0 / (n - 1) as f64;
        let mut points = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                points.push(vec![a as f64 * step, b as f64 * step]);
            }
        }
        let values: Vec<Vec<f64>> = points.iter().map(|x| g.gradient_reduced(x)).collect();
        let base = robust_value_lp(&g.reduced_polytope()?, &points, &values)?;
        Ok(Self { points, base, tol: cfg.tol })
    }

    /// Best robust value over lattice distributions with marginals `(p, q)`,
    /// or `None` when no lattice distribution has them.
    pub fn value(&self, p: f64, q: f64) -> Result<Option<f64>> {
        let mut lp = self.base.clone();
        for (axis, target) in [(0, p), (1, q)] {
            let e: Vec<(usize, f64)> = self.points.iter().enumerate().map(|(t, x)| (t, x[axis])).collect();
            lp.add_sparse_row(&e, Sense::Eq, target);
        }
        let out = solve_lp(&lp, &self.tol)?;
        match out.status {
            LpStatus::Optimal => Ok(Some(out.objective)),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::NumericalFailure("region program reported unbounded".into())),
        }
    }
}

pub fn region_scan(g: &NormalFormGame, cfg: &RegionConfig) -> Result<MarginalRegionScan> {
    let h = cfg.resolution;
    let steps = (1.0 / h).round();
    if !(h > 0.0 && h <= 1.0) || (steps * h - 1.0).abs() > 1e-9 {
        return Err(Error::DomainError(format!("resolution {h} must divide 1")));
    }
    let size = steps as usize + 1;
    let program = RegionProgram::new(g, cfg)?;
    let mut cells: Vec<RegionCell> = (0..size * size)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / size, k % size);
            let (p, q) = (i as f64 / steps, j as f64 / steps);
            let (verdict, value) = match program.value(p, q) {
                Ok(Some(v)) if v >= -cfg.eps_region => (Verdict::Feasible, Some(v)),
                Ok(Some(v)) => (Verdict::Infeasible, Some(v)),
                Ok(None) => (Verdict::Infeasible, None),
                Err(e) => {
                    log::warn!("region cell ({p}, {q}) failed: {e}");
                    (Verdict::Unknown, None)
                }
            };
            RegionCell { i, j, p, q, verdict, value }
        })
        .collect();

    let infeasible: Vec<bool> = cells.iter().map(|c| c.verdict == Verdict::Infeasible).collect();
    let mut boundary = 0;
    let mut within = 0;
    let mut max_distance = 0.0_f64;
    for c in cells.iter_mut().filter(|c| c.verdict == Verdict::Feasible) {
        let (i, j) = (c.i as isize, c.j as isize);
        let touches = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(di, dj)| {
            let (a, b) = (i + di, j + dj);
            a >= 0 && b >= 0 && (a as usize) < size && (b as usize) < size && infeasible[a as usize * size + b as usize]
        });
        if touches {
            c.verdict = Verdict::Boundary;
            boundary += 1;
            let dist = hyperbola_distance(c.p, c.q);
            max_distance = max_distance.max(dist);
            if dist <= 2.0 * h {
                within += 1;
            }
        }
    }
    Ok(MarginalRegionScan {
        game: g.name().to_string(),
        resolution: h,
        support_points: cfg.support_points,
        eps_region: cfg.eps_region,
        size,
        cells,
        hyperbola: HyperbolaDiagnostic { boundary_cells: boundary, within_two_cells: within, max_distance },
    })
}

pub fn hyperbola_value(x: f64, y: f64) -> f64 {
    10.0 * x * x - 25.0 * x * y + 10.0 * y * y - 6.0 * x + 11.0 * y
}

/// First-order distance `|f| / |grad f|` to the zero set of [`hyperbola_value`].
pub fn hyperbola_distance(x: f64, y: f64) -> f64 {
    let f = hyperbola_value(x, y);
    let gx = 20.0 * x - 25.0 * y - 6.0;
    let gy = -25.0 * x + 20.0 * y + 11.0;
    let g = (gx * gx + gy * gy).sqrt();
    if g == 0.0 {
        if f == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        f.abs() / g
    }
}

/// Whether some correlated equilibrium of a two-by-two game has marginals
/// `(p, q)`, with incentive constraints relaxed by `slack`.
pub fn ce_marginal_feasible(g: &NormalFormGame, p: f64, q: f64, slack: f64, tol: &ToleranceConfig) -> Result<bool> {
    if g.actions() != [2, 2] {
        return Err(Error::DimensionMismatch("CE marginals need a two-by-two game".into()));
    }
    let mut lp = LinearProgram::feasibility(4);
    lp.set_bounds(0..4, Bound::NONNEG);
    lp.add_row(&[1.0; 4], Sense::Eq, 1.0);
    // Profiles (a1, a2) are indexed 2 a1 + a2.
    lp.add_row(&[1.0, 1.0, 0.0, 0.0], Sense::Eq, p);
    lp.add_row(&[1.0, 0.0, 1.0, 0.0], Sense::Eq, q);
    for player in 0..2 {
        for a in 0..2 {
            let b = 1 - a;
            let mut row = [0.0; 4];
            for other in 0..2 {
                let mut prof = [0, 0];
                prof[player] = a;
                prof[1 - player] = other;
                let here = g.utility(player, &prof);
                prof[player] = b;
                let there = g.utility(player, &prof);
                row[g.profile_index(&[if player == 0 { a } else { other }, if player == 0 { other } else { a }])] =
                    there - here;
            }
            lp.add_row(&row, Sense::Le, slack);
        }
    }
    Ok(solve_lp(&lp, tol)?.status == LpStatus::Optimal)
}
