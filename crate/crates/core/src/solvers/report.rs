use serde::{Deserialize, Serialize};

use crate::endomap::AffineEndo;
use crate::evicore::FiniteDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Eah,
    Pgd,
}

/// Output of a solve, with gaps recomputed by the gap oracles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub epsilon: f64,
    pub solution: FiniteDistribution,
    pub support_size: usize,
    pub gap_constants: f64,
    pub gap_constants_raw: f64,
    pub gap_linear: f64,
    pub gap_linear_raw: f64,
    /// Sum of per-block gaps when the deviation class is blockwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_product: Option<f64>,
    /// Deviation attaining `gap_linear`.
    pub worst_deviation: AffineEndo,
    /// Weights over the candidate points (fixed points met by the solver).
    pub lambda: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate_value: Option<f64>,
    pub iterations: usize,
    pub ger_iterations: usize,
    pub sep_iterations: usize,
    pub termination: String,
    /// True when the certificate needed the tightened-tolerance retry.
    pub retried: bool,
    pub operator_bound: f64,
    pub outer_radius: f64,
    pub deviation_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average_regret: Option<f64>,
    /// `sum_t <F(x_t), phi_t(x_t) - x_t>`, zero up to fixed-point error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_payoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: usize,
    pub payoff: f64,
    /// Linear gap of the uniform distribution over the first `round` points,
    /// at checkpoints only.
    pub running_gap: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub rows: Vec<TraceRow>,
}

impl RegretTrace {
    pub fn checkpoints(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rows.iter().filter_map(|r| r.running_gap.map(|g| (r.round, g)))
    }
}
