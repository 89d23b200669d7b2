//! No-linear-swap-regret dynamics: play the fixed point of the current
//! deviation, then take a projected gradient step on the deviation.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::eah::deviation_radius;
use super::report::{Method, RegretTrace, SolveReport, TraceRow};
use crate::endomap::{fixed_point, minimize_over_endos, AffineEndo, EndoProjector};
use crate::error::{Error, Result};
use crate::evicore::{evi_gap_constants, evi_gap_linear, evi_gap_product, EVIProblem, FiniteDistribution, PhiClass};
use crate::polytope::Polytope;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgdConfig {
    pub tol: ToleranceConfig,
    /// Overrides `D / (G sqrt(T))`.
    pub step_size: Option<f64>,
    /// Runs up to this many rounds record the running gap every round.
    pub dense_trace_rounds: usize,
    /// Approximate number of log-spaced checkpoints for longer runs.
    pub checkpoints: usize,
}

impl Default for PgdConfig {
    fn default() -> Self {
        Self { tol: ToleranceConfig::default(), step_size: None, dense_trace_rounds: 2000, checkpoints: 200 }
    }
}

/// Rounds at which the running gap is recorded; always includes `1` and `rounds`.
pub fn checkpoint_rounds(rounds: usize, cfg: &PgdConfig) -> Vec<usize> {
    if rounds <= cfg.dense_trace_rounds {
        return (1..=rounds).collect();
    }
    let n = cfg.checkpoints.max(2);
    let ln_t = (rounds as f64).ln();
    let mut out: Vec<usize> = (0..n)
        .map(|k| (ln_t * k as f64 / (n - 1) as f64).exp().round() as usize)
        .map(|t| t.clamp(1, rounds))
        .collect();
    out.push(rounds);
    out.sort_unstable();
    out.dedup();
    out
}

struct Block {
    range: std::ops::Range<usize>,
    set: Polytope,
    projector: EndoProjector,
    phi: AffineEndo,
    /// Running sums of `F x'`, `F` and `<F, x>` over the rounds so far.
    g_mat: Vec<f64>,
    g_vec: Vec<f64>,
    constant: f64,
}

pub fn run_linear_swap_pgd(p: &EVIProblem, rounds: usize, cfg: &PgdConfig) -> Result<(SolveReport, RegretTrace)> {
    if rounds == 0 {
        return Err(Error::DomainError("at least one round is needed".into()));
    }
    let tol = cfg.tol;
    let parts: Vec<(std::ops::Range<usize>, Polytope)> = match &p.phi {
        PhiClass::Linear => vec![(0..p.dim(), p.polytope.clone())],
        PhiClass::ProductLinear(sizes) => crate::evicore::split_blocks(&p.polytope, sizes)?,
        PhiClass::Constants => {
            return Err(Error::DomainError("gradient dynamics need a linear deviation class".into()));
        }
    };
    let big_r = p.polytope.outer_radius();
    let r_y = deviation_radius(&p.polytope, &tol)?;
    let g_bound = p.operator.bound() * (big_r + 1.0);
    let eta = match cfg.step_size {
        Some(s) => s,
        None if g_bound > 0.0 => 2.0 * r_y / (g_bound * (rounds as f64).sqrt()),
        None => 1.0,
    };
    info!("pgd: {rounds} rounds, {} blocks, step {eta:.4e}", parts.len());

    let mut blocks: Vec<Block> = parts
        .into_iter()
        .map(|(range, set)| {
            let k = range.len();
            Block {
                projector: EndoProjector::new(&set, &tol),
                phi: AffineEndo::constant(set.center()),
                g_mat: vec![0.0; k * k],
                g_vec: vec![0.0; k],
                constant: 0.0,
                range,
                set,
            }
        })
        .collect();

    let marks = checkpoint_rounds(rounds, cfg);
    let mut next_mark = 0;
    let mut plays: Vec<Vec<f64>> = Vec::with_capacity(rounds);
    let mut trace = RegretTrace::default();
    let mut self_payoff = 0.0;
    for t in 1..=rounds {
        let mut x = vec![0.0; p.dim()];
        for b in &blocks {
            let xb = fixed_point(&b.set, &b.phi, &tol)?;
            x[b.range.clone()].copy_from_slice(&xb);
        }
        let f = p.evaluate(&x, &tol)?;
        let mut payoff = 0.0;
        for b in blocks.iter_mut() {
            let xb = &x[b.range.clone()];
            let fb = &f[b.range.clone()];
            let k = xb.len();
            let moved = b.phi.apply(xb);
            payoff += fb.iter().zip(moved.iter().zip(xb)).map(|(fv, (m, xv))| fv * (m - xv)).sum::<f64>();
            for r in 0..k {
                b.g_vec[r] += fb[r];
                b.constant += fb[r] * xb[r];
                for s in 0..k {
                    b.g_mat[r * k + s] += fb[r] * xb[s];
                }
            }
            // Gradient of <F, Kx + c> in (K, c) is (F x', F).
            let mut y = b.phi.to_vec();
            for r in 0..k {
                for s in 0..k {
                    y[r * k + s] -= eta * fb[r] * xb[s];
                }
                y[k * k + r] -= eta * fb[r];
            }
            let target = AffineEndo::from_vec(k, &y)?;
            b.phi = b.projector.project(&target)?.endo;
        }
        self_payoff += payoff;
        plays.push(x);

        let running_gap = if next_mark < marks.len() && marks[next_mark] == t {
            next_mark += 1;
            let mut raw = 0.0;
            for b in &blocks {
                let n = t as f64;
                let gm: Vec<f64> = b.g_mat.iter().map(|v| v / n).collect();
                let gv: Vec<f64> = b.g_vec.iter().map(|v| v / n).collect();
                let (v, _, _) = minimize_over_endos(&b.set, &gm, &gv, &tol)?;
                raw -= v - b.constant / n;
            }
            Some(raw)
        } else {
            None
        };
        trace.rows.push(TraceRow { round: t, payoff, running_gap });
    }
    debug!("pgd: self payoff {self_payoff:e}, projector cuts {:?}", blocks.iter().map(|b| b.projector.cut_count()).collect::<Vec<_>>());

    let mu = FiniteDistribution::uniform(plays)?;
    let lin = evi_gap_linear(p, &mu, &tol)?;
    let con = evi_gap_constants(p, &mu, &tol)?;
    let product = match &p.phi {
        PhiClass::ProductLinear(sizes) => Some(evi_gap_product(p, sizes, &mu, &tol)?),
        _ => None,
    };
    let average_regret = product.as_ref().map_or(lin.raw, |g| g.raw);
    let report = SolveReport {
        method: Method::Pgd,
        epsilon: p.epsilon,
        support_size: mu.len(),
        lambda: mu.weights().to_vec(),
        solution: mu,
        gap_constants: con.gap,
        gap_constants_raw: con.raw,
        gap_linear: lin.gap,
        gap_linear_raw: lin.raw,
        gap_product: product.map(|g| g.gap),
        worst_deviation: lin.deviation,
        certificate_value: None,
        iterations: rounds,
        ger_iterations: rounds,
        sep_iterations: 0,
        termination: "rounds".into(),
        retried: false,
        operator_bound: p.operator.bound(),
        outer_radius: big_r,
        deviation_radius: r_y,
        average_regret: Some(average_regret),
        self_payoff: Some(self_payoff),
        step_size: Some(eta),
        wall_time_secs: None,
    };
    Ok((report, trace))
}
