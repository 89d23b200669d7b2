//! Per-player and joint deviation gaps of distributions over mixed profiles.
//!
//! Distributions live in full coordinates (stacked simplices). Utilities are
//! multilinear, so `u_i(x'_i, x_-i) = -<F_i(x), x'_i>` exactly and every gap
//! is a linear program.

use serde::{Deserialize, Serialize};

use super::normal_form::NormalFormGame;
use crate::endomap::AffineEndo;
use crate::error::{check_dim, Result};
use crate::evicore::{constants_gap_from, linear_gap_from, FiniteDistribution, GameCoordinates, Operator, OperatorKind};
use crate::polytope::Polytope;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    /// Each player deviates to a fixed mixed strategy.
    Cce,
    /// Each player applies an affine self-map of its own simplex.
    Lce,
    /// One affine self-map of the whole product polytope.
    Alce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiGap {
    pub mode: GapMode,
    /// One entry per player for CCE and LCE, a single joint entry for ALCE.
    pub raw: Vec<f64>,
    pub gap: Vec<f64>,
    /// Best deviation for each entry; CCE deviations are constant maps.
    pub witnesses: Vec<AffineEndo>,
}

impl PhiGap {
    /// Sum of the reported (clamped) gaps.
    pub fn total(&self) -> f64 {
        self.gap.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CceDecomposition {
    /// `sum_i delta_i`.
    pub total: f64,
    /// `delta_i = max_{x'_i} E u_i(x'_i, x_-i) - E u_i(x)`, unclamped.
    pub per_player: Vec<f64>,
    /// Gap of the joint constant-deviation LP over the product polytope.
    pub joint: f64,
}

/// Polytope and gradient operator of a game in the given coordinates.
pub fn game_gradient_field(g: &NormalFormGame, coordinates: GameCoordinates) -> Result<(Polytope, Operator)> {
    let x = match coordinates {
        GameCoordinates::Full => g.full_polytope()?,
        GameCoordinates::Reduced => g.reduced_polytope()?,
    };
    let op = Operator::new(OperatorKind::GameGradient { game: g.clone(), coordinates }, &x)?;
    Ok((x, op))
}

/// Maps a distribution over first-action probabilities to full coordinates.
pub fn reduced_to_full(g: &NormalFormGame, mu: &FiniteDistribution) -> Result<FiniteDistribution> {
    g.require_binary()?;
    check_dim("distribution dimension", mu.dim(), g.players())?;
    FiniteDistribution::new(mu.support().iter().map(|x| g.to_full(x)).collect(), mu.weights().to_vec())
}

fn block_data(g: &NormalFormGame, mu: &FiniteDistribution) -> Result<Vec<Vec<f64>>> {
    check_dim("distribution dimension", mu.dim(), g.full_dim())?;
    Ok(mu.support().iter().map(|x| g.gradient_full(x)).collect())
}

pub fn phi_gap(g: &NormalFormGame, mu: &FiniteDistribution, mode: GapMode, tol: &ToleranceConfig) -> Result<PhiGap> {
    let values = block_data(g, mu)?;
    let full = g.full_polytope()?;
    mu.check_support(&full, tol.proj)?;
    let mut out = PhiGap { mode, raw: Vec::new(), gap: Vec::new(), witnesses: Vec::new() };
    if mode == GapMode::Alce {
        let lg = linear_gap_from(&full, mu.support(), &values, mu.weights(), tol)?;
        out.raw.push(lg.raw);
        out.gap.push(lg.gap);
        out.witnesses.push(lg.deviation);
        return Ok(out);
    }
    let off = g.block_offsets();
    for i in 0..g.players() {
        let r = off[i]..off[i + 1];
        let simplex = Polytope::simplex(g.actions()[i])?;
        let pts: Vec<Vec<f64>> = mu.support().iter().map(|x| x[r.clone()].to_vec()).collect();
        let vals: Vec<Vec<f64>> = values.iter().map(|f| f[r.clone()].to_vec()).collect();
        if mode == GapMode::Cce {
            let cg = constants_gap_from(&simplex, &pts, &vals, mu.weights(), tol)?;
            out.raw.push(cg.raw);
            out.gap.push(cg.gap);
            out.witnesses.push(AffineEndo::constant(&cg.deviation));
        } else {
            let lg = linear_gap_from(&simplex, &pts, &vals, mu.weights(), tol)?;
            out.raw.push(lg.raw);
            out.gap.push(lg.gap);
            out.witnesses.push(lg.deviation);
        }
    }
    Ok(out)
}

/// Per-player constant-deviation gains and their sum, with the joint LP
/// value as a second route to the sum.
pub fn average_cce_decomposition(
    g: &NormalFormGame,
    mu: &FiniteDistribution,
    tol: &ToleranceConfig,
) -> Result<CceDecomposition> {
    let per = phi_gap(g, mu, GapMode::Cce, tol)?;
    let values = block_data(g, mu)?;
    let joint = constants_gap_from(&g.full_polytope()?, mu.support(), &values, mu.weights(), tol)?;
    Ok(CceDecomposition { total: per.raw.iter().sum(), per_player: per.raw, joint: joint.raw })
}

/// Correlated-equilibrium incentive check of a distribution over pure
/// profiles: the largest gain of any player from swapping one
/// recommendation for another.
pub fn pure_ce_violation(g: &NormalFormGame, weights: &[f64]) -> Result<f64> {
    check_dim("profile weights", weights.len(), g.profile_count())?;
    let mut worst = 0.0_f64;
    for i in 0..g.players() {
        for a in 0..g.actions()[i] {
            for b in 0..g.actions()[i] {
                if a == b {
                    continue;
                }
                let mut gain = 0.0;
                for k in 0..g.profile_count() {
                    let mut p = g.profile(k);
                    if p[i] != a {
                        continue;
                    }
                    let here = g.utility(i, &p);
                    p[i] = b;
                    gain += weights[k] * (g.utility(i, &p) - here);
                }
                worst = worst.max(gain);
            }
        }
    }
    Ok(worst)
}
