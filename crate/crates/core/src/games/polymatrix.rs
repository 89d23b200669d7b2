//! Pairwise zero-sum (polymatrix) games.

use serde::{Deserialize, Serialize};

use super::normal_form::NormalFormGame;
use crate::error::{Error, Result};
use crate::evicore::{sample_collapse_flags, CollapseFlags};

/// Payoffs of one pairwise interaction: `a` is paid to player `i` (rows are
/// `i`'s actions), `b` to player `j` (rows are `j`'s actions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolymatrixEdge {
    pub i: usize,
    pub j: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolymatrixSpec {
    #[serde(default)]
    pub name: String,
    pub actions: Vec<usize>,
    pub edges: Vec<PolymatrixEdge>,
}

const ZERO_SUM_TOL: f64 = 1e-12;

fn matrix_shape(m: &[Vec<f64>], rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::InvariantViolation(format!("{what} must be {rows}x{cols}")));
    }
    Ok(())
}

/// The normal-form game of a polymatrix spec, with its collapse flags checked
/// on random profiles. Fails unless `b = -a'` on every edge.
pub fn polymatrix_zero_sum(spec: &PolymatrixSpec) -> Result<(NormalFormGame, CollapseFlags)> {
    let n = spec.actions.len();
    for (k, e) in spec.edges.iter().enumerate() {
        if e.i >= n || e.j >= n || e.i == e.j {
            return Err(Error::InvariantViolation(format!("edge {k} joins players {} and {}", e.i, e.j)));
        }
        let (ai, aj) = (spec.actions[e.i], spec.actions[e.j]);
        matrix_shape(&e.a, ai, aj, &format!("edge {k} payoff to player {}", e.i))?;
        matrix_shape(&e.b, aj, ai, &format!("edge {k} payoff to player {}", e.j))?;
        for r in 0..ai {
            for c in 0..aj {
                if (e.a[r][c] + e.b[c][r]).abs() > ZERO_SUM_TOL {
                    return Err(Error::StructureViolation(format!(
                        "edge {k} is not zero-sum at actions ({r}, {c}): {} + {} != 0",
                        e.a[r][c], e.b[c][r]
                    )));
                }
            }
        }
    }
    let profiles: usize = spec.actions.iter().product();
    let mut utilities = vec![vec![0.0; profiles]; n];
    let shell = NormalFormGame::new(spec.name.clone(), spec.actions.clone(), utilities.clone())?;
    for k in 0..profiles {
        let p = shell.profile(k);
        for e in &spec.edges {
            utilities[e.i][k] += e.a[p[e.i]][p[e.j]];
            utilities[e.j][k] += e.b[p[e.j]][p[e.i]];
        }
    }
    let game = NormalFormGame::new(spec.name.clone(), spec.actions.clone(), utilities)?;
    let full = game.full_polytope()?;
    let g = game.clone();
    let flags = sample_collapse_flags(&full, &move |x: &[f64]| g.gradient_full(x), 0x9a11)?;
    if !flags.qualifies() {
        return Err(Error::StructureViolation(format!(
            "sampled checks failed for '{}': {flags:?}",
            spec.name
        )));
    }
    Ok((game, flags))
}

fn pennies_edge(i: usize, j: usize) -> PolymatrixEdge {
    PolymatrixEdge { i, j, a: vec![vec![1.0, -1.0], vec![-1.0, 1.0]], b: vec![vec![-1.0, 1.0], vec![1.0, -1.0]] }
}

pub fn matching_pennies_spec() -> PolymatrixSpec {
    PolymatrixSpec { name: "matching-pennies".into(), actions: vec![2, 2], edges: vec![pennies_edge(0, 1)] }
}

/// Three players on a cycle, each link a matching-pennies game.
pub fn polymatrix_cycle_spec() -> PolymatrixSpec {
    PolymatrixSpec {
        name: "polymatrix-cycle".into(),
        actions: vec![2, 2, 2],
        edges: vec![pennies_edge(0, 1), pennies_edge(1, 2), pennies_edge(2, 0)],
    }
}
